#pragma once

// Synthetic data: single cubes and articulated 17-joint stick figures placed
// in front of a pinhole camera, plus a small flat-shaded cube rasterizer.
// Everything is deterministic under the seed.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "perspcrop/camera.hpp"
#include "perspcrop/image.hpp"
#include "perspcrop/pose.hpp"

namespace perspcrop {

struct CubeInstance {
    MmPoint center;
    Rotation3 orientation;    ///< cube -> camera
    double edge = 500.0;      ///< mm

    /// Vertex i has local coordinates (+-e/2) with x from bit 0, y from bit 1, z from bit 2.
    std::array<Eigen::Vector3d, 8> vertices() const;
    /// Same cube expressed in a frame rotated by r^T (r maps that frame to this one).
    CubeInstance in_frame(const Rotation3& r) const;
    /// Throws InvalidArgument unless edge > 0 and center z > edge.
    void validate() const;
};

/// Fixed 17-joint skeleton (pelvis, legs, spine, head, arms).
struct Skeleton {
    static constexpr std::size_t kJoints = 17;
    static constexpr std::size_t kRoot = 0;
    /// parent[j] < j; -1 for the root.
    static const std::array<int, kJoints>& parents();
    /// Offset of each joint from its parent in the rest pose (T-pose, y down,
    /// facing -z), millimeters. The root entry is zero.
    static const std::array<Eigen::Vector3d, kJoints>& rest_offsets();
    static std::vector<std::pair<int, int>> bones();
    static std::vector<double> bone_lengths();
};

struct StickFigure {
    std::vector<MmPoint> joints;
    std::size_t root = Skeleton::kRoot;
    std::vector<std::pair<int, int>> bones;
    std::vector<double> bone_lengths;

    Pose3D pose() const;
};

/// Forward kinematics from the rest pose with the root at the origin.
/// local_rotations[j] (axis-angle) turns the bone ending at joint j; entry 0
/// turns the whole body, after which `yaw` is applied about the vertical axis
/// and then `pitch` about the camera x axis (camera elevation) and `roll`
/// about the optical axis. All-zero rotations and angles give the T-pose.
StickFigure articulate(const std::vector<Eigen::Vector3d>& local_rotations, double yaw,
                       double pitch = 0.0, double roll = 0.0);

enum class Placement { Centered, General };

const char* to_string(Placement p);
Placement parse_placement(const std::string& s);

struct SamplingRanges {
    double depth_min = 3000.0;      ///< mm, of the cube center / pelvis
    double depth_max = 7000.0;
    double region_min = 0.15;       ///< root projection range (general placement)
    double region_max = 0.85;
    double yaw_max_deg = 180.0;     ///< figures only
    double pitch_max_deg = 90.0;    ///< figures only, camera elevation spread
    double roll_max_deg = 180.0;    ///< figures only, camera roll spread
    double articulation = 1.0;      ///< figures only, 0 = rest pose
    double edge = 500.0;            ///< cubes only
};

struct DatasetSpec {
    std::size_t count = 1000;
    Placement placement = Placement::General;
    CameraIntrinsics camera{0.6, 0.6, 0.5, 0.5, 1000, 1000};
    std::uint64_t seed = 0;
    SamplingRanges ranges;

    static DatasetSpec cube_defaults();
    static DatasetSpec figure_defaults();
    /// Throws InvalidArgument on an empty count or inconsistent ranges.
    void validate() const;
};

struct LabeledPose {
    Pose2D pose2d;
    Pose3D pose3d;
};

struct CubeSample {
    CubeInstance cube;
    LabeledPose label;   ///< 8 vertices, centroid as the root
};

/// Cube centers project uniformly into the region (or onto the principal
/// point when centered); depth and orientation are resampled until all 8
/// vertices land inside the image. Throws RejectionExhausted after 10^4
/// consecutive failures.
std::vector<CubeSample> gen_cube_dataset(const DatasetSpec& spec);

/// Same placement rule for the pelvis of an articulated figure.
std::vector<LabeledPose> gen_figure_dataset(const DatasetSpec& spec);

std::vector<PoseRecord> to_records(const std::vector<LabeledPose>& data);
std::vector<LabeledPose> from_records(const std::vector<PoseRecord>& recs);

enum class Shading { FlatPerFace, Ambient };

struct RasterOptions {
    Shading shading = Shading::FlatPerFace;
    Eigen::Vector3d background{0.0, 0.0, 0.0};
    /// Subsamples per axis per pixel; the pixel value is their mean.
    int supersample = 1;
};

/// Face colors, indexed -x, +x, -y, +y, -z, +z in cube coordinates.
const std::array<Eigen::Vector3d, 6>& cube_face_colors();

/// Back-face culled painter's rendering of the six faces into an
/// out_h x out_w RGB image seen through `intr`. Flat shading scales a face
/// color by max(0, -n . view_dir) at the face center.
Image rasterize_cube(const CubeInstance& cube, const CameraIntrinsics& intr, int out_height,
                     int out_width, const RasterOptions& opts = {});

} // namespace perspcrop
