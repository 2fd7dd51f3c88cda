#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "perspcrop/camera.hpp"

namespace perspcrop {

/// 2D keypoints in normalized image coordinates. `root` designates the
/// reference joint (pelvis); an empty root means "use the centroid".
struct Pose2D {
    std::vector<ImagePoint> joints;
    std::optional<std::size_t> root;

    std::size_t size() const { return joints.size(); }
    /// Root joint, or the centroid when no root is designated.
    ImagePoint center() const;
};

/// 3D joints in millimeters, camera frame.
struct Pose3D {
    std::vector<MmPoint> joints;
    std::optional<std::size_t> root;

    std::size_t size() const { return joints.size(); }
    Eigen::Vector3d center() const;
    /// Copy with the center subtracted from every joint.
    Pose3D centered() const;
};

struct Box2 {
    Eigen::Vector2d min;
    Eigen::Vector2d max;
    Eigen::Vector2d extent() const { return max - min; }
};

Box2 bounding_box(const Pose2D& pose);

/// One JSON Lines record.
struct PoseRecord {
    Pose2D pose2d;
    std::optional<Pose3D> pose3d;
};

// { "joints2d": [[u,v],...], "joints3d": [[x,y,z],...]?, "root": int }
// root = -1 encodes the centroid.
std::string pose_record_to_json(const PoseRecord& rec);
PoseRecord pose_record_from_json(const std::string& line);

std::string write_pose_jsonl(const std::vector<PoseRecord>& records);
std::vector<PoseRecord> parse_pose_jsonl(const std::string& text);
std::vector<PoseRecord> read_pose_jsonl(const std::filesystem::path& path);

} // namespace perspcrop
