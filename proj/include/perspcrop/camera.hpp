#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Core>

#include "perspcrop/errors.hpp"

namespace perspcrop {

// Coordinate units. Normalized image coordinates live in [0,1]^2 with the
// origin at the top-left corner, x to the right and y downwards; the camera
// looks along +z.
namespace unit {
struct Pixels {};
struct NormalizedImage {};
struct CameraPlane {};
struct Millimeters {};
} // namespace unit

template <class Unit>
struct Point2 {
    double x = 0.0;
    double y = 0.0;

    Eigen::Vector2d vec() const { return {x, y}; }
    static Point2 from(const Eigen::Vector2d& v) { return {v.x(), v.y()}; }
    friend bool operator==(const Point2&, const Point2&) = default;
};

template <class Unit>
struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Eigen::Vector3d vec() const { return {x, y, z}; }
    static Point3 from(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }
    friend bool operator==(const Point3&, const Point3&) = default;
};

using PixelPoint = Point2<unit::Pixels>;
using ImagePoint = Point2<unit::NormalizedImage>;
using PlanePoint = Point3<unit::CameraPlane>;
using MmPoint = Point3<unit::Millimeters>;

/// Homogeneous 2D point (x, y, w).
struct HomogeneousPoint {
    Eigen::Vector3d h;

    static HomogeneousPoint lift(const ImagePoint& p) { return {{p.x, p.y, 1.0}}; }
    /// Throws PointAtInfinity when |w| < eps.
    ImagePoint dehomogenize(double eps = 1e-12) const;
};

/// Pinhole intrinsics in normalized image units. Zero skew.
class CameraIntrinsics {
public:
    /// Throws InvalidArgument when f <= 0, t outside [0,1] or a dimension is < 1.
    CameraIntrinsics(double fx, double fy, double cx, double cy, int width, int height);

    double fx() const { return fx_; }
    double fy() const { return fy_; }
    double cx() const { return cx_; }
    double cy() const { return cy_; }
    Eigen::Vector2d focal() const { return {fx_, fy_}; }
    Eigen::Vector2d principal_point() const { return {cx_, cy_}; }
    int width() const { return width_; }
    int height() const { return height_; }

    Eigen::Matrix3d as_matrix() const;
    Eigen::Matrix3d inverse_matrix() const;

    CameraIntrinsics with_focal(double fx, double fy) const;
    CameraIntrinsics with_principal_point(double cx, double cy) const;
    CameraIntrinsics with_size(int width, int height) const;

    friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;

private:
    double fx_, fy_, cx_, cy_;
    int width_, height_;
};

/// Proper rotation matrix (R^T R = I, det R = 1, both within 1e-9).
class Rotation3 {
public:
    Rotation3() : m_(Eigen::Matrix3d::Identity()) {}
    /// Throws InvalidArgument when the matrix is not a proper rotation.
    explicit Rotation3(const Eigen::Matrix3d& m);

    const Eigen::Matrix3d& matrix() const { return m_; }
    Rotation3 transpose() const;
    Eigen::Vector3d operator*(const Eigen::Vector3d& v) const { return m_ * v; }
    Rotation3 operator*(const Rotation3& o) const;

    static bool is_rotation(const Eigen::Matrix3d& m, double tol = 1e-9);

private:
    struct Unchecked {};
    Rotation3(const Eigen::Matrix3d& m, Unchecked) : m_(m) {}
    Eigen::Matrix3d m_;
};

ImagePoint pixel_to_normalized(const PixelPoint& pt, const CameraIntrinsics& intr);
PixelPoint normalized_to_pixel(const ImagePoint& pt, const CameraIntrinsics& intr);

/// K^-1 (u, v, 1)^T, third component exactly 1.
PlanePoint backproject(const ImagePoint& pt, const CameraIntrinsics& intr);

/// K p followed by dehomogenization. Throws NonPositiveDepth when z <= 0.
ImagePoint project(const Eigen::Vector3d& p, const CameraIntrinsics& intr);

template <class Unit>
ImagePoint project(const Point3<Unit>& p, const CameraIntrinsics& intr) {
    return project(p.vec(), intr);
}

// Camera JSON: { "fx", "fy", "cx", "cy", "width", "height" }.
CameraIntrinsics read_camera_json(const std::filesystem::path& path);
CameraIntrinsics camera_from_json_text(const std::string& text);
std::string camera_to_json_text(const CameraIntrinsics& intr);

} // namespace perspcrop
