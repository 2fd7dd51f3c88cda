#include "perspcrop/crop.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace perspcrop {

CropTarget::CropTarget(const Eigen::Vector2d& p, const Eigen::Vector2d& s) : p_(p), s_(s) {
    if (!p.allFinite()) throw InvalidArgument("crop target must be finite");
    if (!(s.x() > 0.0) || !(s.y() > 0.0) || !s.allFinite())
        throw InvalidArgument("crop scale must be positive (s=" + std::to_string(s.x()) + "," +
                              std::to_string(s.y()) + ")");
}

double CropTarget::p_norm() const { return std::sqrt(1.0 + p_.squaredNorm()); }

std::string to_string(FocalOption opt) {
    switch (opt) {
    case FocalOption::A: return "A";
    case FocalOption::B: return "B";
    case FocalOption::C: return "C";
    }
    return "?";
}

FocalOption parse_focal_option(const std::string& s) {
    if (s.size() == 1) {
        switch (std::toupper(static_cast<unsigned char>(s[0]))) {
        case 'A': return FocalOption::A;
        case 'B': return FocalOption::B;
        case 'C': return FocalOption::C;
        }
    }
    throw InvalidArgument("unknown focal option '" + s + "' (expected A, B or C)");
}

std::string to_string(RotationMode m) {
    switch (m) {
    case RotationMode::None: return "none";
    case RotationMode::XOnly: return "x_only";
    case RotationMode::XYFull: return "xy_full";
    }
    return "?";
}

RotationMode parse_rotation_mode(const std::string& s) {
    if (s == "none") return RotationMode::None;
    if (s == "x_only") return RotationMode::XOnly;
    if (s == "xy_full") return RotationMode::XYFull;
    throw InvalidArgument("unknown rotation mode '" + s + "' (expected none, x_only, xy_full)");
}

Eigen::Matrix3d AffineCrop::as_matrix() const {
    Eigen::Matrix3d c;
    c << scale.x(), skew.x(), translation.x(), skew.y(), scale.y(), translation.y(), 0.0, 0.0, 1.0;
    return c;
}

ImagePoint AffineCrop::apply(const ImagePoint& q) const {
    return {scale.x() * q.x + skew.x() * q.y + translation.x(),
            skew.y() * q.x + scale.y() * q.y + translation.y()};
}

// With a = sqrt(1 + px^2) and b = sqrt(1 + px^2 + py^2):
//   R = R_y R_x,  sin(phi) = px/a, cos(phi) = 1/a, sin(theta) = -py/b, cos(theta) = a/b.
Rotation3 rotation_from_target(const Eigen::Vector2d& p) {
    const double px = p.x(), py = p.y();
    const double a = std::sqrt(1.0 + px * px);
    const double b = std::sqrt(1.0 + px * px + py * py);
    Eigen::Matrix3d r;
    r << 1.0 / a, -px * py / (a * b), px / b,
         0.0, a / b, py / b,
         -px / a, -py / (a * b), 1.0 / b;
    return Rotation3(r);
}

Rotation3 tilt_rotation_from_target(const Eigen::Vector2d& p) {
    const double px = p.x(), py = p.y();
    const double a = std::sqrt(1.0 + px * px);
    const double b = std::sqrt(1.0 + px * px + py * py);
    Eigen::Matrix3d r;
    r << 1.0, 0.0, 0.0,
         0.0, a / b, py / b,
         0.0, -py / b, a / b;
    return Rotation3(r);
}

Rotation3 pan_rotation_from_target(const Eigen::Vector2d& p) {
    const double px = p.x();
    const double a = std::sqrt(1.0 + px * px);
    Eigen::Matrix3d r;
    r << 1.0 / a, 0.0, px / a,
         0.0, 1.0, 0.0,
         -px / a, 0.0, 1.0 / a;
    return Rotation3(r);
}

Eigen::Vector2d virtual_focal(const CropTarget& tgt, const CameraIntrinsics& intr,
                              FocalOption opt) {
    const Eigen::Vector2d f = intr.focal();
    const double norm = tgt.p_norm();
    switch (opt) {
    case FocalOption::A: return f;
    case FocalOption::B: return f * norm;
    case FocalOption::C: {
        const double a = std::sqrt(tgt.p().x() * tgt.p().x() + 1.0);
        return {f.x() * norm * a, f.y() * norm * norm / a};
    }
    }
    return f;
}

VirtualCamera build_virtual_camera(const CropTarget& tgt, const CameraIntrinsics& intr,
                                   FocalOption opt, bool preserve_aspect) {
    Eigen::Vector2d f_virt = virtual_focal(tgt, intr, opt).cwiseQuotient(tgt.s());
    if (preserve_aspect) f_virt.setConstant(f_virt.minCoeff());
    return {rotation_from_target(tgt.p()),
            CameraIntrinsics(f_virt.x(), f_virt.y(), 0.5, 0.5, intr.width(), intr.height()),
            tgt.p()};
}

WarpMatrix warp_matrix(const VirtualCamera& vc, const CameraIntrinsics& intr) {
    const Eigen::Matrix3d& r = vc.rotation.matrix();
    return {vc.intr.as_matrix() * r.transpose() * intr.inverse_matrix(),
            intr.as_matrix() * r * vc.intr.inverse_matrix()};
}

ImagePoint warp_point(const WarpMatrix& w, const ImagePoint& pt) {
    return HomogeneousPoint{w.m * Eigen::Vector3d(pt.x, pt.y, 1.0)}.dehomogenize();
}

Eigen::Vector2d bbox_scale(const Pose2D& kps, double margin) {
    if (!(margin >= 0.0)) throw InvalidArgument("bounding box margin must be >= 0");
    const Eigen::Vector2d extent = bounding_box(kps).extent();
    if (extent.x() < 1e-9 || extent.y() < 1e-9)
        throw DegenerateBoundingBox(extent.x(), extent.y());
    return extent * (1.0 + margin);
}

namespace {

CameraIntrinsics effective_intrinsics(const CameraIntrinsics& intr,
                                      const KeypointCropOptions& opts) {
    return opts.principal_point_at_center ? intr.with_principal_point(0.5, 0.5) : intr;
}

VirtualCamera camera_for(const Pose2D& kps, const CameraIntrinsics& intr,
                         const KeypointCropOptions& opts) {
    const Eigen::Vector2d s = bbox_scale(kps, opts.margin);
    const PlanePoint p = backproject(kps.center(), intr);
    return build_virtual_camera(CropTarget({p.x, p.y}, s), intr, opts.focal, opts.preserve_aspect);
}

Pose2D warp_pose(const Pose2D& kps, const WarpMatrix& w) {
    Pose2D out{{}, kps.root};
    out.joints.reserve(kps.size());
    for (const auto& j : kps.joints) out.joints.push_back(warp_point(w, j));
    return out;
}

} // namespace

KeypointCrop pcl_keypoints(const Pose2D& kps, const CameraIntrinsics& intr,
                           const KeypointCropOptions& opts) {
    if (kps.joints.empty()) throw InvalidArgument("pcl_keypoints needs at least one keypoint");
    const CameraIntrinsics k = effective_intrinsics(intr, opts);
    VirtualCamera vc = camera_for(kps, k, opts);
    WarpMatrix w = warp_matrix(vc, k);
    return {warp_pose(kps, w), std::move(vc), w};
}

SequenceCrop pcl_keypoint_sequence(const std::vector<Pose2D>& seq, const CameraIntrinsics& intr,
                                   const KeypointCropOptions& opts) {
    if (seq.empty()) throw InvalidArgument("pcl_keypoint_sequence needs at least one frame");
    const std::size_t middle = seq.size() / 2;
    if (seq[middle].joints.empty()) throw InvalidArgument("middle frame has no keypoints");
    const CameraIntrinsics k = effective_intrinsics(intr, opts);
    VirtualCamera vc = camera_for(seq[middle], k, opts);
    WarpMatrix w = warp_matrix(vc, k);
    SequenceCrop out{{}, std::move(vc), w, middle};
    out.poses.reserve(seq.size());
    for (const auto& frame : seq) out.poses.push_back(warp_pose(frame, w));
    return out;
}

namespace {

Pose3D rotate_pose(const Pose3D& pose, const Eigen::Matrix3d& r) {
    Pose3D out{{}, pose.root};
    out.joints.reserve(pose.size());
    for (const auto& j : pose.joints) out.joints.push_back(MmPoint::from(r * j.vec()));
    return out;
}

} // namespace

Pose3D pcl_inv(const Pose3D& pose, const VirtualCamera& vc) {
    return rotate_pose(pose, vc.rotation.matrix());
}

Pose3D pcl_inv_partial(const Pose3D& pose, const VirtualCamera& vc, RotationMode mode) {
    switch (mode) {
    case RotationMode::None: return pose;
    case RotationMode::XOnly: return rotate_pose(pose, tilt_rotation_from_target(vc.target).matrix());
    case RotationMode::XYFull: return pcl_inv(pose, vc);
    }
    return pose;
}

Pose2D rc_crop(const Pose2D& kps, double margin) {
    const Eigen::Vector2d s = bbox_scale(kps, margin);
    const ImagePoint c = kps.center();
    const AffineCrop crop{{-c.x / s.x(), -c.y / s.y()}, {1.0 / s.x(), 1.0 / s.y()}, {0.0, 0.0}};
    Pose2D out{{}, kps.root};
    out.joints.reserve(kps.size());
    for (const auto& j : kps.joints) out.joints.push_back(crop.apply(j));
    return out;
}

} // namespace perspcrop
