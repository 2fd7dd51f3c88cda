#include <algorithm>
#include <cmath>

#include "perspcrop/errors.hpp"
#include "perspcrop/synthetic.hpp"

namespace perspcrop {

const std::array<Eigen::Vector3d, 6>& cube_face_colors() {
    static const std::array<Eigen::Vector3d, 6> c{
        Eigen::Vector3d(0.90, 0.20, 0.20), Eigen::Vector3d(0.20, 0.85, 0.25),
        Eigen::Vector3d(0.20, 0.35, 0.95), Eigen::Vector3d(0.95, 0.85, 0.20),
        Eigen::Vector3d(0.25, 0.85, 0.90), Eigen::Vector3d(0.85, 0.30, 0.85)};
    return c;
}

namespace {

struct Face {
    std::array<Eigen::Vector2d, 4> px;   // projected corners, pixel units
    int color = 0;
    double shade = 1.0;
    double depth = 0.0;
};

// Corner indices (vertex numbering of CubeInstance::vertices) of each face,
// in cyclic order.
constexpr int kFaceCorners[6][4] = {
    {0, 2, 6, 4}, {1, 3, 7, 5},   // -x, +x
    {0, 1, 5, 4}, {2, 3, 7, 6},   // -y, +y
    {0, 1, 3, 2}, {4, 5, 7, 6},   // -z, +z
};

bool inside(const Face& f, double x, double y) {
    bool pos = false, neg = false;
    for (int i = 0; i < 4; ++i) {
        const Eigen::Vector2d& a = f.px[i];
        const Eigen::Vector2d& b = f.px[(i + 1) % 4];
        const double e = (b.x() - a.x()) * (y - a.y()) - (b.y() - a.y()) * (x - a.x());
        if (e > 0) pos = true;
        if (e < 0) neg = true;
    }
    return !(pos && neg);
}

} // namespace

Image rasterize_cube(const CubeInstance& cube, const CameraIntrinsics& intr, int out_height,
                     int out_width, const RasterOptions& opts) {
    cube.validate();
    if (out_height < 1 || out_width < 1) throw InvalidArgument("image dimensions must be positive");
    if (opts.supersample < 1) throw InvalidArgument("supersample must be at least 1");

    const auto verts = cube.vertices();
    std::vector<Face> faces;
    for (int f = 0; f < 6; ++f) {
        Eigen::Vector3d n_local = Eigen::Vector3d::Zero();
        n_local[f / 2] = (f % 2) ? 1.0 : -1.0;
        const Eigen::Vector3d n = cube.orientation * n_local;
        const Eigen::Vector3d c = cube.center.vec() + n * (cube.edge / 2.0);
        if (!(n.dot(c) < 0.0)) continue;   // facing away
        Face face;
        face.color = f;
        face.depth = c.z();
        face.shade = opts.shading == Shading::FlatPerFace ? std::max(0.0, -n.dot(c.normalized())) : 1.0;
        for (int k = 0; k < 4; ++k) {
            const ImagePoint q = project(verts[kFaceCorners[f][k]], intr);
            face.px[k] = {q.x * out_width, q.y * out_height};
        }
        faces.push_back(face);
    }
    // Far to near.
    std::sort(faces.begin(), faces.end(), [](const Face& a, const Face& b) { return a.depth > b.depth; });

    const auto& colors = cube_face_colors();
    const int ss = opts.supersample;
    const int n_sub = ss * ss;
    Image img(out_height, out_width, 3);
    std::vector<int> hits(faces.size() + 1);
    for (int i = 0; i < out_height; ++i) {
        for (int j = 0; j < out_width; ++j) {
            std::fill(hits.begin(), hits.end(), 0);
            for (int a = 0; a < ss; ++a) {
                for (int b = 0; b < ss; ++b) {
                    const double y = i + (a + 0.5) / ss;
                    const double x = j + (b + 0.5) / ss;
                    int owner = 0;   // background
                    for (std::size_t f = 0; f < faces.size(); ++f)
                        if (inside(faces[f], x, y)) owner = static_cast<int>(f) + 1;
                    hits[owner]++;
                }
            }
            Eigen::Vector3d value = Eigen::Vector3d::Zero();
            int distinct = 0, only = 0;
            for (std::size_t o = 0; o < hits.size(); ++o) {
                if (hits[o] == 0) continue;
                ++distinct;
                only = static_cast<int>(o);
                const Eigen::Vector3d c =
                    o == 0 ? opts.background : colors[faces[o - 1].color] * faces[o - 1].shade;
                value += c * hits[o];
            }
            // A fully covered pixel takes its color exactly.
            if (distinct == 1)
                value = only == 0 ? opts.background : Eigen::Vector3d(colors[faces[only - 1].color] * faces[only - 1].shade);
            else
                value /= n_sub;
            for (int ch = 0; ch < 3; ++ch) img.at(i, j, ch) = value[ch];
        }
    }
    return img;
}

} // namespace perspcrop
