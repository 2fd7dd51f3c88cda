#pragma once

// Closed-form derivatives of the perspective crop pipeline and the
// central-difference oracle they are checked against.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "perspcrop/crop.hpp"
#include "perspcrop/image.hpp"

namespace perspcrop {

struct Jacobian {
    Eigen::MatrixXd entries;
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;

    Eigen::Index rows() const { return entries.rows(); }
    Eigen::Index cols() const { return entries.cols(); }
};

using VectorFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h, one column per input.
Jacobian finite_difference(const VectorFunction& f, const Eigen::VectorXd& x, double h);

inline constexpr double kGeometryStep = 1e-6;
inline constexpr double kPixelStep = 1e-4;

/// Elementwise |a - n| / max(|a|, |n|, floor), maximized over all entries.
double max_relative_error(const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& numeric,
                          double floor = 1e-4);

/// Partials of the nine rotation entries (row-major) w.r.t. (px, py).
Jacobian d_rotation_d_p(const Eigen::Vector2d& p);

/// Partials of the nine warp entries (row-major) w.r.t. (px, py, sx, sy).
Jacobian d_warp_d_params(const CameraIntrinsics& intr, const CropTarget& tgt, FocalOption opt,
                         bool preserve_aspect = false);

/// Same for the inverse warp K R K_virt^-1.
Jacobian d_warp_inverse_d_params(const CameraIntrinsics& intr, const CropTarget& tgt,
                                 FocalOption opt, bool preserve_aspect = false);

/// Warp entries as a function of (px, py, sx, sy); the finite-difference side.
Eigen::VectorXd warp_entries(const CameraIntrinsics& intr, const Eigen::Vector4d& params,
                             FocalOption opt, bool preserve_aspect = false);

/// Jacobian of every crop pixel value (row-major out_h x out_w x C) w.r.t.
/// (px, py, sx, sy).
Jacobian d_crop_d_params(const Image& img, const CameraIntrinsics& intr, const CropTarget& tgt,
                         FocalOption opt, int out_height, int out_width);

struct GradcheckEntry {
    std::string name;
    double max_rel_error = 0.0;
    double tolerance = 0.0;
    std::size_t checked = 0;
    bool passed() const { return max_rel_error < tolerance; }
};

struct GradcheckOptions {
    std::uint64_t seed = 7;
    int geometry_configs = 1000;
    int image_configs = 3;
    int crop_size = 24;
    bool include_mlp = true;
};

/// Every analytic Jacobian in the library against central differences.
std::vector<GradcheckEntry> run_gradcheck(const GradcheckOptions& opts = {});

} // namespace perspcrop
