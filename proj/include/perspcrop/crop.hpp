#pragma once

// Perspective crop geometry: the virtual camera aimed at a region of
// interest, the homography between the real and the virtual image, keypoint
// cropping, and the inverse rotation applied to 3D predictions. The
// rectangular (affine) crop is kept alongside as the baseline.

#include <string>
#include <vector>

#include <Eigen/Core>

#include "perspcrop/camera.hpp"
#include "perspcrop/pose.hpp"

namespace perspcrop {

/// Crop center on the camera plane (z = 1) and crop scale as a fraction of
/// the full image.
class CropTarget {
public:
    /// Throws InvalidArgument unless s > 0 componentwise and p is finite.
    CropTarget(const Eigen::Vector2d& p, const Eigen::Vector2d& s);

    const Eigen::Vector2d& p() const { return p_; }
    const Eigen::Vector2d& s() const { return s_; }
    /// Norm of the homogeneous lift, sqrt(1 + px^2 + py^2) >= 1.
    double p_norm() const;

private:
    Eigen::Vector2d p_;
    Eigen::Vector2d s_;
};

enum class FocalOption { A, B, C };

std::string to_string(FocalOption opt);
/// Accepts "A"/"B"/"C" (case-insensitive); throws InvalidArgument otherwise.
FocalOption parse_focal_option(const std::string& s);

/// Camera sharing the real optical center, rotated so that its optical axis
/// pierces the crop target, with its principal point at (0.5, 0.5).
struct VirtualCamera {
    Rotation3 rotation;       ///< virtual -> real
    CameraIntrinsics intr;    ///< K_virt
    Eigen::Vector2d target;   ///< p the optical axis points at
};

/// Homography from real to virtual normalized image coordinates, with its inverse.
struct WarpMatrix {
    Eigen::Matrix3d m;
    Eigen::Matrix3d m_inv;

    WarpMatrix inverse() const { return {m_inv, m}; }
    static WarpMatrix identity() {
        return {Eigen::Matrix3d::Identity(), Eigen::Matrix3d::Identity()};
    }
};

/// Rectangular crop  q' = C q  with C = [[sx, cx, ax], [cy, sy, ay], [0, 0, 1]].
struct AffineCrop {
    Eigen::Vector2d translation{0.0, 0.0};
    Eigen::Vector2d scale{1.0, 1.0};
    Eigen::Vector2d skew{0.0, 0.0};

    Eigen::Matrix3d as_matrix() const;
    bool invertible() const { return scale.x() * scale.y() != skew.x() * skew.y(); }
    ImagePoint apply(const ImagePoint& q) const;
};

/// R_virt->real for a target p on the camera plane. Yaw about the optical
/// axis is zero; entries are built from lengths, no trigonometry.
Rotation3 rotation_from_target(const Eigen::Vector2d& p);

/// Rotation about the x axis only (the tilt factor of rotation_from_target).
Rotation3 tilt_rotation_from_target(const Eigen::Vector2d& p);
/// Rotation about the y axis only (the pan factor).
Rotation3 pan_rotation_from_target(const Eigen::Vector2d& p);

/// h_virt for the option; the virtual focal length is h_virt / s.
Eigen::Vector2d virtual_focal(const CropTarget& tgt, const CameraIntrinsics& intr, FocalOption opt);

/// With preserve_aspect both axes use min(f_virt_x, f_virt_y).
VirtualCamera build_virtual_camera(const CropTarget& tgt, const CameraIntrinsics& intr,
                                   FocalOption opt, bool preserve_aspect = false);

/// Gamma = K_virt R^T K^-1 and its analytic inverse K R K_virt^-1.
WarpMatrix warp_matrix(const VirtualCamera& vc, const CameraIntrinsics& intr);

/// Throws PointAtInfinity when the homogeneous coordinate is below 1e-12.
ImagePoint warp_point(const WarpMatrix& w, const ImagePoint& pt);

struct KeypointCropOptions {
    FocalOption focal = FocalOption::C;
    /// Relative padding added to the tight bounding box: s = extent * (1 + margin).
    double margin = 0.1;
    bool preserve_aspect = false;
    /// Treat the principal point as the image center (0.5, 0.5).
    bool principal_point_at_center = false;
};

/// Crop scale from the tight bounding box. Throws DegenerateBoundingBox when
/// either extent is below 1e-9.
Eigen::Vector2d bbox_scale(const Pose2D& kps, double margin);

struct KeypointCrop {
    Pose2D pose;
    VirtualCamera camera;
    WarpMatrix warp;
};

/// The crop target is the pose's root joint (its centroid when no root is set).
KeypointCrop pcl_keypoints(const Pose2D& kps, const CameraIntrinsics& intr,
                           const KeypointCropOptions& opts = {});

struct SequenceCrop {
    std::vector<Pose2D> poses;
    VirtualCamera camera;
    WarpMatrix warp;
    std::size_t middle = 0;
};

/// One shared virtual camera built from frame floor(len/2).
SequenceCrop pcl_keypoint_sequence(const std::vector<Pose2D>& seq, const CameraIntrinsics& intr,
                                   const KeypointCropOptions& opts = {});

/// Rotate a virtual-frame 3D pose back into the real camera frame.
Pose3D pcl_inv(const Pose3D& pose, const VirtualCamera& vc);

enum class RotationMode { None, XOnly, XYFull };
std::string to_string(RotationMode m);
RotationMode parse_rotation_mode(const std::string& s);

/// XOnly applies the tilt factor, XYFull the full rotation (== pcl_inv),
/// None is the identity.
Pose3D pcl_inv_partial(const Pose3D& pose, const VirtualCamera& vc, RotationMode mode);

/// Root-centering crop: subtract the center, divide by the bbox scale.
Pose2D rc_crop(const Pose2D& kps, double margin = 0.1);

} // namespace perspcrop
