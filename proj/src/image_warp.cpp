#include "perspcrop/image_warp.hpp"

#include <algorithm>
#include <cmath>

#include "perspcrop/simd/kernels.hpp"

namespace perspcrop {

SampleGrid make_grid(const WarpMatrix& w, int out_height, int out_width) {
    if (out_height < 1 || out_width < 1) throw InvalidArgument("grid dimensions must be positive");
    SampleGrid g{out_height, out_width, {}, {}};
    const std::size_t n = static_cast<std::size_t>(out_height) * out_width;
    g.x.resize(n);
    g.y.resize(n);
    double h[9];
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) h[r * 3 + c] = w.m_inv(r, c);
    const auto& k = simd::image_kernels();
    for (int i = 0; i < out_height; ++i) {
        const double v = (i + 0.5) / out_height;
        const std::size_t off = static_cast<std::size_t>(i) * out_width;
        const double min_w = k.homography_row(h, v, out_width, g.x.data() + off, g.y.data() + off);
        if (!(min_w >= 1e-12)) throw PointAtInfinity(min_w);
    }
    return g;
}

Image bilinear_sample(const Image& img, const SampleGrid& grid, Padding) {
    Image out(grid.out_height, grid.out_width, img.channels());
    simd::image_kernels().bilinear(img.data().data(), img.height(), img.width(), img.channels(),
                                   grid.x.data(), grid.y.data(), grid.size(), out.data().data());
    return out;
}

GridGradient grad_bilinear(const Image& img, const SampleGrid& grid) {
    const int w = img.width(), h = img.height(), c = img.channels();
    GridGradient g;
    g.dx.assign(grid.size() * c, 0.0);
    g.dy.assign(grid.size() * c, 0.0);
    auto pixel = [&](long row, long col, int ch) {
        if (row < 0 || col < 0 || row >= h || col >= w) return 0.0;
        return img.at(static_cast<int>(row), static_cast<int>(col), ch);
    };
    for (std::size_t s = 0; s < grid.size(); ++s) {
        double px = grid.x[s] * w - 0.5;
        double py = grid.y[s] * h - 0.5;
        // Lattice points take the lower-index cell: floor(p) - 1.
        double fx0 = std::floor(px), fy0 = std::floor(py);
        if (std::abs(px - std::nearbyint(px)) < simd::kLatticeSnap) {
            px = std::nearbyint(px);
            fx0 = px - 1.0;
        }
        if (std::abs(py - std::nearbyint(py)) < simd::kLatticeSnap) {
            py = std::nearbyint(py);
            fy0 = py - 1.0;
        }
        if (px < -2.0 || py < -2.0 || px > w + 1.0 || py > h + 1.0) continue;
        const double fx = px - fx0, fy = py - fy0;
        const long x0 = static_cast<long>(fx0), y0 = static_cast<long>(fy0);
        for (int ch = 0; ch < c; ++ch) {
            const double i00 = pixel(y0, x0, ch), i01 = pixel(y0, x0 + 1, ch);
            const double i10 = pixel(y0 + 1, x0, ch), i11 = pixel(y0 + 1, x0 + 1, ch);
            const double d_px = (1.0 - fy) * (i01 - i00) + fy * (i11 - i10);
            const double d_py = (1.0 - fx) * (i10 - i00) + fx * (i11 - i01);
            g.dx[s * c + ch] = d_px * w;
            g.dy[s * c + ch] = d_py * h;
        }
    }
    return g;
}

ImageCrop perspective_crop_image(const Image& img, const CameraIntrinsics& intr,
                                 const CropTarget& tgt, FocalOption opt, int out_height,
                                 int out_width, bool preserve_aspect) {
    VirtualCamera vc = build_virtual_camera(tgt, intr, opt, preserve_aspect);
    vc.intr = vc.intr.with_size(out_width, out_height);
    const WarpMatrix w = warp_matrix(vc, intr);
    Image out = bilinear_sample(img, make_grid(w, out_height, out_width));
    return {std::move(out), std::move(vc), w};
}

} // namespace perspcrop
