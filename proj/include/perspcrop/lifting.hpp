#pragma once

// 2D -> 3D keypoint lifting with rectangular (RC) or perspective (PCL)
// input normalization, training, evaluation metrics and the experiment
// harnesses built on them.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "perspcrop/crop.hpp"
#include "perspcrop/mlp.hpp"
#include "perspcrop/synthetic.hpp"

namespace perspcrop {

enum class Preprocessing { RC, PCL };

std::string to_string(Preprocessing p);
/// "rc" or "pcl" (case-insensitive).
Preprocessing parse_preprocessing(const std::string& s);

struct TrainConfig {
    Preprocessing preprocessing = Preprocessing::PCL;
    FocalOption focal = FocalOption::C;
    double learning_rate = 1e-3;
    int epochs = 200;
    int batch_size = 64;
    std::uint64_t seed = 0;
    int hidden = 256;
    /// Applied to the camera focal length at evaluation time only.
    double focal_multiplier = 1.0;
    /// Post-hoc rotation of RC predictions at evaluation time.
    RotationMode rotation = RotationMode::None;
    double margin = 0.1;
    double val_fraction = 0.1;

    /// Throws InvalidArgument on non-positive hyperparameters.
    void validate() const;
    nlohmann::ordered_json to_json() const;
    /// Missing keys keep their defaults; unknown keys are rejected.
    static TrainConfig from_json(const nlohmann::json& j);
    KeypointCropOptions crop_options() const;
};

/// Per-coordinate standardization statistics.
struct NormStats {
    Eigen::VectorXd in_mean, in_std, out_mean, out_std;

    /// Rows are samples. Standard deviations below 1e-8 are replaced by 1.
    static NormStats compute(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& outputs);
    Eigen::VectorXd standardize_input(const Eigen::VectorXd& x) const;
    Eigen::VectorXd standardize_output(const Eigen::VectorXd& y) const;
    Eigen::VectorXd unstandardize_output(const Eigen::VectorXd& y) const;

    nlohmann::ordered_json to_json() const;
    static NormStats from_json(const nlohmann::json& j);
};

/// What postprocess needs to undo preprocess. The virtual camera is kept
/// for both modes; RC only uses it for the rotation ablation.
struct PreprocessContext {
    Preprocessing mode;
    VirtualCamera camera;
    std::optional<std::size_t> root;
};

struct Preprocessed {
    Eigen::VectorXd features;   ///< 2J values (u0, v0, u1, v1, ...), not standardized
    PreprocessContext context;
};

/// RC: root-centered keypoints divided by the bbox scale. PCL: keypoints
/// warped into the virtual camera aimed at the root.
Preprocessed preprocess(const Pose2D& kps, Preprocessing mode, const CameraIntrinsics& intr,
                        const KeypointCropOptions& opts);

/// Training target: root-relative joints (3J), in the camera frame for RC
/// and in the virtual camera frame for PCL.
Eigen::VectorXd encode_label(const Pose3D& gt, const PreprocessContext& ctx);

/// Un-standardizes a network output and maps it to a root-relative pose in
/// the real camera frame: RC as is (optionally rotated by `rc_rotation`),
/// PCL through pcl_inv.
Pose3D postprocess(const Eigen::VectorXd& net_output, const NormStats& stats,
                   const PreprocessContext& ctx, RotationMode rc_rotation = RotationMode::None);

struct LiftingModel {
    TrainConfig config;
    NormStats stats;
    Mlp<float> net;

    nlohmann::ordered_json to_json() const;
    static LiftingModel from_json(const nlohmann::json& j);
};

struct EpochLoss {
    int epoch = 0;
    double train_loss = 0.0;   ///< mean squared joint-coordinate error, mm^2
    double val_loss = 0.0;
};

struct TrainResult {
    LiftingModel model;
    std::vector<EpochLoss> curve;
    int best_epoch = 0;
};

/// Deterministic under cfg.seed. Throws InvalidArgument on an empty or
/// inconsistent dataset and NonFiniteLoss when training diverges.
TrainResult train(const std::vector<LabeledPose>& data, const CameraIntrinsics& intr,
                  const TrainConfig& cfg);

struct EvalOptions {
    double focal_multiplier = 1.0;
    RotationMode rotation = RotationMode::None;
};

/// Root-relative prediction in the real camera frame.
std::vector<Pose3D> predict(const LiftingModel& model, const std::vector<Pose2D>& poses,
                            const CameraIntrinsics& intr, const EvalOptions& opts = {});

struct EvalReport {
    double mpjpe = 0.0;    ///< mm
    double pck50 = 0.0;    ///< percent
    double pck100 = 0.0;
    std::vector<double> per_sample;
    std::vector<ImagePoint> root_position;

    std::string to_csv() const;
};

/// Mean joint distance after centering both poses on their roots.
double mpjpe(const Pose3D& pred, const Pose3D& gt);
/// Percentage of joints within `threshold` mm after root centering.
double pck(const Pose3D& pred, const Pose3D& gt, double threshold);

EvalReport score(const std::vector<Pose3D>& pred, const std::vector<LabeledPose>& data);

EvalReport evaluate(const LiftingModel& model, const std::vector<LabeledPose>& data,
                    const CameraIntrinsics& intr, const EvalOptions& opts = {});

struct ErrorBin {
    double lo = 0.0, hi = 0.0;   ///< distance of the root from the image center
    std::size_t count = 0;
    double mean_mpjpe = 0.0;
};

struct BinnedErrors {
    std::vector<ErrorBin> bins;   ///< empty bins omitted
    double slope = 0.0;           ///< least-squares MPJPE per unit distance over bin centers

    std::string to_csv() const;
};

/// Equal-width bins over [0, max_distance]; a non-positive max_distance
/// uses the largest distance in the report.
BinnedErrors binned_error_analysis(const EvalReport& report, int bins, double max_distance = 0.0);

struct FocalSweepRow {
    double multiplier = 1.0;
    double mpjpe = 0.0;
};

std::vector<FocalSweepRow> focal_robustness_sweep(const LiftingModel& model,
                                                  const std::vector<LabeledPose>& data,
                                                  const CameraIntrinsics& intr,
                                                  const std::vector<double>& multipliers);

/// Evaluates an RC model with its predictions rotated by the partial or
/// full virtual camera rotation. Throws InvalidArgument for PCL models.
EvalReport rotation_ablation(const LiftingModel& rc_model, const std::vector<LabeledPose>& data,
                             const CameraIntrinsics& intr, RotationMode mode);

struct CapacityRow {
    Preprocessing mode = Preprocessing::PCL;
    int width = 0;
    std::size_t parameters = 0;
    double mpjpe = 0.0;
};

/// RC at the largest width, PCL at every width.
std::vector<CapacityRow> capacity_sweep(const std::vector<LabeledPose>& train_data,
                                        const std::vector<LabeledPose>& test_data,
                                        const CameraIntrinsics& intr, const TrainConfig& base,
                                        const std::vector<int>& widths);

std::string focal_sweep_csv(const std::vector<FocalSweepRow>& rows);
std::string capacity_csv(const std::vector<CapacityRow>& rows);

} // namespace perspcrop
