#include "perspcrop/camera.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/LU>
#include <json.hpp>

#include "perspcrop/io.hpp"

namespace perspcrop {

ImagePoint HomogeneousPoint::dehomogenize(double eps) const {
    if (!(std::abs(h.z()) >= eps)) throw PointAtInfinity(h.z());
    return {h.x() / h.z(), h.y() / h.z()};
}

CameraIntrinsics::CameraIntrinsics(double fx, double fy, double cx, double cy, int width,
                                   int height)
    : fx_(fx), fy_(fy), cx_(cx), cy_(cy), width_(width), height_(height) {
    if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy))
        throw InvalidArgument("focal lengths must be positive and finite (fx=" +
                              std::to_string(fx) + ", fy=" + std::to_string(fy) + ")");
    if (!(cx >= 0.0 && cx <= 1.0) || !(cy >= 0.0 && cy <= 1.0))
        throw InvalidArgument("principal point must lie in [0,1]^2 (cx=" + std::to_string(cx) +
                              ", cy=" + std::to_string(cy) + ")");
    if (width < 1 || height < 1)
        throw InvalidArgument("image size must be positive (" + std::to_string(width) + "x" +
                              std::to_string(height) + ")");
}

Eigen::Matrix3d CameraIntrinsics::as_matrix() const {
    Eigen::Matrix3d k;
    k << fx_, 0.0, cx_, 0.0, fy_, cy_, 0.0, 0.0, 1.0;
    return k;
}

Eigen::Matrix3d CameraIntrinsics::inverse_matrix() const {
    Eigen::Matrix3d k;
    k << 1.0 / fx_, 0.0, -cx_ / fx_, 0.0, 1.0 / fy_, -cy_ / fy_, 0.0, 0.0, 1.0;
    return k;
}

CameraIntrinsics CameraIntrinsics::with_focal(double fx, double fy) const {
    return {fx, fy, cx_, cy_, width_, height_};
}

CameraIntrinsics CameraIntrinsics::with_principal_point(double cx, double cy) const {
    return {fx_, fy_, cx, cy, width_, height_};
}

CameraIntrinsics CameraIntrinsics::with_size(int width, int height) const {
    return {fx_, fy_, cx_, cy_, width, height};
}

bool Rotation3::is_rotation(const Eigen::Matrix3d& m, double tol) {
    if (!m.allFinite()) return false;
    const double ortho = (m.transpose() * m - Eigen::Matrix3d::Identity()).norm();
    return ortho <= tol && std::abs(m.determinant() - 1.0) <= tol;
}

Rotation3::Rotation3(const Eigen::Matrix3d& m) : m_(m) {
    if (!is_rotation(m)) throw InvalidArgument("matrix is not a proper rotation");
}

Rotation3 Rotation3::transpose() const { return {m_.transpose(), Unchecked{}}; }

Rotation3 Rotation3::operator*(const Rotation3& o) const { return {m_ * o.m_, Unchecked{}}; }

ImagePoint pixel_to_normalized(const PixelPoint& pt, const CameraIntrinsics& intr) {
    return {pt.x / intr.width(), pt.y / intr.height()};
}

PixelPoint normalized_to_pixel(const ImagePoint& pt, const CameraIntrinsics& intr) {
    return {pt.x * intr.width(), pt.y * intr.height()};
}

PlanePoint backproject(const ImagePoint& pt, const CameraIntrinsics& intr) {
    return {(pt.x - intr.cx()) / intr.fx(), (pt.y - intr.cy()) / intr.fy(), 1.0};
}

ImagePoint project(const Eigen::Vector3d& p, const CameraIntrinsics& intr) {
    if (!(p.z() > 0.0)) throw NonPositiveDepth(p.z());
    return {intr.fx() * p.x() / p.z() + intr.cx(), intr.fy() * p.y() / p.z() + intr.cy()};
}

CameraIntrinsics camera_from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("camera JSON does not parse: ") + e.what());
    }
    if (!j.is_object()) throw InvalidArgument("camera JSON must be an object");
    auto number = [&](const char* key) {
        if (!j.contains(key) || !j[key].is_number())
            throw InvalidArgument(std::string("camera JSON: missing numeric field '") + key + "'");
        return j[key].get<double>();
    };
    auto integer = [&](const char* key) {
        if (!j.contains(key) || !j[key].is_number_integer())
            throw InvalidArgument(std::string("camera JSON: missing integer field '") + key + "'");
        return j[key].get<int>();
    };
    return {number("fx"), number("fy"), number("cx"), number("cy"), integer("width"),
            integer("height")};
}

CameraIntrinsics read_camera_json(const std::filesystem::path& path) {
    try {
        return camera_from_json_text(read_text_file(path));
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(path.string() + ": " + e.what());
    }
}

std::string camera_to_json_text(const CameraIntrinsics& intr) {
    nlohmann::ordered_json j;
    j["fx"] = intr.fx();
    j["fy"] = intr.fy();
    j["cx"] = intr.cx();
    j["cy"] = intr.cy();
    j["width"] = intr.width();
    j["height"] = intr.height();
    return j.dump(2) + "\n";
}

} // namespace perspcrop
