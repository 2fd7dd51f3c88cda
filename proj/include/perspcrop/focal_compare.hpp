#pragma once

// Numerical check of how each focal option scales the crop at its center.

#include <string>
#include <vector>

#include <Eigen/Core>

#include "perspcrop/crop.hpp"

namespace perspcrop {

struct FocalScaleRow {
    Eigen::Vector2d p;          ///< target on the camera plane
    FocalOption option = FocalOption::C;
    /// d(source)/d(virtual) along each image axis at the patch center,
    /// normalized units, by central differences.
    Eigen::Vector2d axis_scale;
    /// s / axis_scale; 1 means the crop spans exactly s of the source there.
    Eigen::Vector2d ratio;
    bool preserves_scale = false;   ///< both ratios within 1% of 1
};

struct FocalComparison {
    std::vector<FocalScaleRow> rows;
    /// Per option: true when every target preserved scale.
    bool preserved[3] = {true, true, true};

    std::string to_csv() const;
};

FocalComparison compare_focal_options(const CameraIntrinsics& intr,
                                      const std::vector<Eigen::Vector2d>& targets,
                                      const Eigen::Vector2d& s = {0.2, 0.2});

/// n x n grid over [-extent, extent]^2 on the camera plane.
std::vector<Eigen::Vector2d> target_grid(int n, double extent);

} // namespace perspcrop
