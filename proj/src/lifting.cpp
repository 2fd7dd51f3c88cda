#include "perspcrop/lifting.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

#include "perspcrop/errors.hpp"
#include "perspcrop/random.hpp"

namespace perspcrop {

std::string to_string(Preprocessing p) { return p == Preprocessing::RC ? "rc" : "pcl"; }

Preprocessing parse_preprocessing(const std::string& s) {
    std::string l = s;
    std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
    if (l == "rc") return Preprocessing::RC;
    if (l == "pcl") return Preprocessing::PCL;
    throw InvalidArgument("unknown preprocessing '" + s + "' (expected rc or pcl)");
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw InvalidArgument("learning_rate must be positive");
    if (epochs < 1) throw InvalidArgument("epochs must be positive");
    if (batch_size < 1) throw InvalidArgument("batch_size must be positive");
    if (hidden < 1) throw InvalidArgument("hidden must be positive");
    if (!(focal_multiplier > 0.0) || !std::isfinite(focal_multiplier))
        throw InvalidArgument("focal_multiplier must be positive");
    if (!(margin >= 0.0) || !std::isfinite(margin)) throw InvalidArgument("margin must be >= 0");
    if (!(val_fraction > 0.0 && val_fraction < 1.0))
        throw InvalidArgument("val_fraction must lie in (0,1)");
}

nlohmann::ordered_json TrainConfig::to_json() const {
    nlohmann::ordered_json j;
    j["preprocessing"] = to_string(preprocessing);
    j["focal"] = to_string(focal);
    j["learning_rate"] = learning_rate;
    j["epochs"] = epochs;
    j["batch_size"] = batch_size;
    j["seed"] = seed;
    j["hidden"] = hidden;
    j["focal_multiplier"] = focal_multiplier;
    j["rotation"] = to_string(rotation);
    j["margin"] = margin;
    j["val_fraction"] = val_fraction;
    return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
    TrainConfig c;
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "preprocessing") c.preprocessing = parse_preprocessing(v.get<std::string>());
            else if (key == "focal") c.focal = parse_focal_option(v.get<std::string>());
            else if (key == "learning_rate") c.learning_rate = v.get<double>();
            else if (key == "epochs") c.epochs = v.get<int>();
            else if (key == "batch_size") c.batch_size = v.get<int>();
            else if (key == "seed") c.seed = v.get<std::uint64_t>();
            else if (key == "hidden") c.hidden = v.get<int>();
            else if (key == "focal_multiplier") c.focal_multiplier = v.get<double>();
            else if (key == "rotation") c.rotation = parse_rotation_mode(v.get<std::string>());
            else if (key == "margin") c.margin = v.get<double>();
            else if (key == "val_fraction") c.val_fraction = v.get<double>();
            else throw InvalidArgument("unknown config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed config: ") + e.what());
    }
    c.validate();
    return c;
}

KeypointCropOptions TrainConfig::crop_options() const {
    KeypointCropOptions o;
    o.focal = focal;
    o.margin = margin;
    return o;
}

NormStats NormStats::compute(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& outputs) {
    if (inputs.rows() == 0 || inputs.rows() != outputs.rows())
        throw InvalidArgument("NormStats needs matching, non-empty sample matrices");
    auto stats = [](const Eigen::MatrixXd& m, Eigen::VectorXd& mean, Eigen::VectorXd& sd) {
        mean = m.colwise().mean().transpose();
        sd.resize(m.cols());
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const double var = (m.col(c).array() - mean[c]).square().mean();
            const double s = std::sqrt(var);
            sd[c] = s > 1e-8 ? s : 1.0;
        }
    };
    NormStats n;
    stats(inputs, n.in_mean, n.in_std);
    stats(outputs, n.out_mean, n.out_std);
    return n;
}

Eigen::VectorXd NormStats::standardize_input(const Eigen::VectorXd& x) const {
    return (x - in_mean).cwiseQuotient(in_std);
}

Eigen::VectorXd NormStats::standardize_output(const Eigen::VectorXd& y) const {
    return (y - out_mean).cwiseQuotient(out_std);
}

Eigen::VectorXd NormStats::unstandardize_output(const Eigen::VectorXd& y) const {
    return y.cwiseProduct(out_std) + out_mean;
}

namespace {

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vec(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace

nlohmann::ordered_json NormStats::to_json() const {
    nlohmann::ordered_json j;
    j["in_mean"] = to_vec(in_mean);
    j["in_std"] = to_vec(in_std);
    j["out_mean"] = to_vec(out_mean);
    j["out_std"] = to_vec(out_std);
    return j;
}

NormStats NormStats::from_json(const nlohmann::json& j) {
    NormStats n;
    try {
        n.in_mean = from_vec(j.at("in_mean").get<std::vector<double>>());
        n.in_std = from_vec(j.at("in_std").get<std::vector<double>>());
        n.out_mean = from_vec(j.at("out_mean").get<std::vector<double>>());
        n.out_std = from_vec(j.at("out_std").get<std::vector<double>>());
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed normalization stats: ") + e.what());
    }
    if (n.in_mean.size() != n.in_std.size() || n.out_mean.size() != n.out_std.size())
        throw InvalidArgument("normalization stats have mismatched lengths");
    if ((n.in_std.array() <= 1e-8).any() || (n.out_std.array() <= 1e-8).any())
        throw InvalidArgument("normalization std must exceed 1e-8");
    return n;
}

Preprocessed preprocess(const Pose2D& kps, Preprocessing mode, const CameraIntrinsics& intr,
                        const KeypointCropOptions& opts) {
    const KeypointCrop crop = pcl_keypoints(kps, intr, opts);
    const Pose2D feat = mode == Preprocessing::PCL ? crop.pose : rc_crop(kps, opts.margin);
    Eigen::VectorXd f(2 * static_cast<Eigen::Index>(feat.size()));
    for (std::size_t i = 0; i < feat.size(); ++i) {
        f[2 * i] = feat.joints[i].x;
        f[2 * i + 1] = feat.joints[i].y;
    }
    return {std::move(f), {mode, crop.camera, kps.root}};
}

Eigen::VectorXd encode_label(const Pose3D& gt, const PreprocessContext& ctx) {
    const Eigen::Vector3d c = gt.center();
    const Eigen::Matrix3d rt = ctx.camera.rotation.matrix().transpose();
    Eigen::VectorXd y(3 * static_cast<Eigen::Index>(gt.size()));
    for (std::size_t i = 0; i < gt.size(); ++i) {
        Eigen::Vector3d v = gt.joints[i].vec() - c;
        if (ctx.mode == Preprocessing::PCL) v = rt * v;
        y.segment<3>(3 * static_cast<Eigen::Index>(i)) = v;
    }
    return y;
}

Pose3D postprocess(const Eigen::VectorXd& net_output, const NormStats& stats,
                   const PreprocessContext& ctx, RotationMode rc_rotation) {
    const Eigen::VectorXd y = stats.unstandardize_output(net_output);
    Pose3D pose{{}, ctx.root};
    for (Eigen::Index i = 0; i + 2 < y.size(); i += 3)
        pose.joints.push_back(MmPoint::from(y.segment<3>(i)));
    if (ctx.mode == Preprocessing::PCL) return pcl_inv(pose, ctx.camera);
    return pcl_inv_partial(pose, ctx.camera, rc_rotation);
}

nlohmann::ordered_json LiftingModel::to_json() const {
    nlohmann::ordered_json j;
    j["config"] = config.to_json();
    j["stats"] = stats.to_json();
    j["network"] = net.to_json();
    return j;
}

LiftingModel LiftingModel::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("config") || !j.contains("stats") || !j.contains("network"))
        throw InvalidArgument("model file needs config, stats and network");
    LiftingModel m{TrainConfig::from_json(j["config"]), NormStats::from_json(j["stats"]),
                   Mlp<float>::from_json(j["network"])};
    if (m.stats.in_mean.size() != m.net.input_size() || m.stats.out_mean.size() != m.net.output_size())
        throw InvalidArgument("model stats do not match the network size");
    return m;
}

namespace {

void check_dataset(const std::vector<LabeledPose>& data) {
    if (data.empty()) throw InvalidArgument("dataset is empty");
    const std::size_t j = data.front().pose2d.size();
    if (j == 0) throw InvalidArgument("samples have no joints");
    for (std::size_t i = 0; i < data.size(); ++i)
        if (data[i].pose2d.size() != j || data[i].pose3d.size() != j)
            throw InvalidArgument("sample " + std::to_string(i) + " has a different joint count");
}

struct Matrices {
    Eigen::MatrixXd x, y;   // rows are samples
    std::vector<PreprocessContext> ctx;
};

Matrices build(const std::vector<LabeledPose>& data, const std::vector<std::size_t>& idx,
               Preprocessing mode, const CameraIntrinsics& intr, const KeypointCropOptions& opts) {
    const Eigen::Index j = static_cast<Eigen::Index>(data.front().pose2d.size());
    Matrices m{Eigen::MatrixXd(idx.size(), 2 * j), Eigen::MatrixXd(idx.size(), 3 * j), {}};
    for (std::size_t r = 0; r < idx.size(); ++r) {
        const LabeledPose& s = data[idx[r]];
        Preprocessed p = preprocess(s.pose2d, mode, intr, opts);
        m.x.row(r) = p.features.transpose();
        m.y.row(r) = encode_label(s.pose3d, p.context).transpose();
        m.ctx.push_back(std::move(p.context));
    }
    return m;
}

std::vector<float> standardized(const Eigen::MatrixXd& m, const Eigen::VectorXd& mean,
                                const Eigen::VectorXd& sd) {
    std::vector<float> out(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            out[r * m.cols() + c] = static_cast<float>((m(r, c) - mean[c]) / sd[c]);
    return out;
}

// Mean over samples of the summed squared coordinate error, mm^2.
double dataset_loss(const Mlp<float>& net, const std::vector<float>& x, const std::vector<float>& y,
                    const std::vector<float>& w, std::size_t n) {
    constexpr std::size_t chunk = 256;
    const std::size_t di = net.input_size(), d_o = net.output_size();
    std::vector<float> out(chunk * d_o);
    double total = 0.0;
    for (std::size_t s = 0; s < n; s += chunk) {
        const std::size_t b = std::min(chunk, n - s);
        net.forward(x.data() + s * di, b, out.data());
        for (std::size_t i = 0; i < b * d_o; ++i) {
            const double r = static_cast<double>(out[i]) - y[s * d_o + i];
            total += w[i % d_o] * r * r;
        }
    }
    return total / static_cast<double>(n);
}

} // namespace

TrainResult train(const std::vector<LabeledPose>& data, const CameraIntrinsics& intr,
                  const TrainConfig& cfg) {
    cfg.validate();
    check_dataset(data);
    if (data.size() < 2) throw InvalidArgument("training needs at least two samples");

    Rng rng(cfg.seed);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    const std::size_t n_val = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(cfg.val_fraction * data.size())), 1, data.size() - 1);
    const std::vector<std::size_t> val_idx(order.begin(), order.begin() + n_val);
    const std::vector<std::size_t> train_idx(order.begin() + n_val, order.end());

    const KeypointCropOptions opts = cfg.crop_options();
    const Matrices tr = build(data, train_idx, cfg.preprocessing, intr, opts);
    const Matrices va = build(data, val_idx, cfg.preprocessing, intr, opts);
    const NormStats stats = NormStats::compute(tr.x, tr.y);

    const std::vector<float> xtr = standardized(tr.x, stats.in_mean, stats.in_std);
    const std::vector<float> ytr = standardized(tr.y, stats.out_mean, stats.out_std);
    const std::vector<float> xva = standardized(va.x, stats.in_mean, stats.in_std);
    const std::vector<float> yva = standardized(va.y, stats.out_mean, stats.out_std);
    // Squared error in mm: standardized residuals weighted by std^2.
    std::vector<float> weights(stats.out_std.size());
    for (Eigen::Index c = 0; c < stats.out_std.size(); ++c)
        weights[c] = static_cast<float>(stats.out_std[c] * stats.out_std[c]);

    const int di = static_cast<int>(tr.x.cols()), d_o = static_cast<int>(tr.y.cols());
    TrainResult res{{cfg, stats, Mlp<float>(di, cfg.hidden, d_o, rng.next())}, {}, 0};
    Mlp<float>& net = res.model.net;
    Adam<float> adam(net.parameter_count(), static_cast<float>(cfg.learning_rate));
    std::vector<float> best = net.parameters();
    double best_val = dataset_loss(net, xva, yva, weights, va.x.rows());

    const std::size_t n = train_idx.size(), bs = static_cast<std::size_t>(cfg.batch_size);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<float> bx(bs * di), by(bs * d_o), grad;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(perm);
        double sum = 0.0;
        for (std::size_t s = 0; s < n; s += bs) {
            const std::size_t b = std::min(bs, n - s);
            for (std::size_t r = 0; r < b; ++r) {
                std::copy_n(xtr.begin() + perm[s + r] * di, di, bx.begin() + r * di);
                std::copy_n(ytr.begin() + perm[s + r] * d_o, d_o, by.begin() + r * d_o);
            }
            const float loss = net.loss_and_gradient(bx.data(), by.data(), weights.data(), b, grad);
            if (!std::isfinite(loss))
                throw NonFiniteLoss("non-finite training loss at epoch " + std::to_string(epoch) +
                                    ", sample offset " + std::to_string(s));
            sum += static_cast<double>(loss) * b;
            adam.step(net.parameters(), grad);
        }
        const double val = dataset_loss(net, xva, yva, weights, va.x.rows());
        if (!std::isfinite(val))
            throw NonFiniteLoss("non-finite validation loss at epoch " + std::to_string(epoch));
        res.curve.push_back({epoch, sum / static_cast<double>(n), val});
        if (val < best_val) {
            best_val = val;
            best = net.parameters();
            res.best_epoch = epoch;
        }
    }
    net.parameters() = best;
    return res;
}

std::vector<Pose3D> predict(const LiftingModel& model, const std::vector<Pose2D>& poses,
                            const CameraIntrinsics& intr, const EvalOptions& opts) {
    if (!(opts.focal_multiplier > 0.0)) throw InvalidArgument("focal multiplier must be positive");
    const CameraIntrinsics k = intr.with_focal(intr.fx() * opts.focal_multiplier,
                                               intr.fy() * opts.focal_multiplier);
    const KeypointCropOptions copts = model.config.crop_options();
    const Mlp<float>& net = model.net;
    std::vector<Pose3D> out;
    out.reserve(poses.size());
    std::vector<float> x(net.input_size()), y(net.output_size());
    for (const Pose2D& p : poses) {
        if (static_cast<int>(2 * p.size()) != net.input_size())
            throw InvalidArgument("pose joint count does not match the model");
        const Preprocessed pre = preprocess(p, model.config.preprocessing, k, copts);
        const Eigen::VectorXd xs = model.stats.standardize_input(pre.features);
        for (int i = 0; i < net.input_size(); ++i) x[i] = static_cast<float>(xs[i]);
        net.forward(x.data(), 1, y.data());
        Eigen::VectorXd yd(net.output_size());
        for (int i = 0; i < net.output_size(); ++i) yd[i] = y[i];
        out.push_back(postprocess(yd, model.stats, pre.context, opts.rotation));
    }
    return out;
}

double mpjpe(const Pose3D& pred, const Pose3D& gt) {
    if (pred.size() != gt.size() || gt.size() == 0)
        throw InvalidArgument("mpjpe needs poses with equal, non-zero joint counts");
    const Eigen::Vector3d cp = pred.center(), cg = gt.center();
    double sum = 0.0;
    for (std::size_t i = 0; i < gt.size(); ++i)
        sum += ((pred.joints[i].vec() - cp) - (gt.joints[i].vec() - cg)).norm();
    return sum / static_cast<double>(gt.size());
}

double pck(const Pose3D& pred, const Pose3D& gt, double threshold) {
    if (pred.size() != gt.size() || gt.size() == 0)
        throw InvalidArgument("pck needs poses with equal, non-zero joint counts");
    const Eigen::Vector3d cp = pred.center(), cg = gt.center();
    std::size_t hit = 0;
    for (std::size_t i = 0; i < gt.size(); ++i)
        if (((pred.joints[i].vec() - cp) - (gt.joints[i].vec() - cg)).norm() < threshold) ++hit;
    return 100.0 * static_cast<double>(hit) / static_cast<double>(gt.size());
}

EvalReport score(const std::vector<Pose3D>& pred, const std::vector<LabeledPose>& data) {
    if (pred.size() != data.size()) throw InvalidArgument("prediction count differs from dataset");
    EvalReport r;
    if (data.empty()) return r;
    double p50 = 0.0, p100 = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double e = mpjpe(pred[i], data[i].pose3d);
        r.per_sample.push_back(e);
        r.root_position.push_back(data[i].pose2d.center());
        r.mpjpe += e;
        p50 += pck(pred[i], data[i].pose3d, 50.0);
        p100 += pck(pred[i], data[i].pose3d, 100.0);
    }
    const double n = static_cast<double>(data.size());
    r.mpjpe /= n;
    r.pck50 = p50 / n;
    r.pck100 = p100 / n;
    return r;
}

EvalReport evaluate(const LiftingModel& model, const std::vector<LabeledPose>& data,
                    const CameraIntrinsics& intr, const EvalOptions& opts) {
    std::vector<Pose2D> poses;
    poses.reserve(data.size());
    for (const auto& d : data) poses.push_back(d.pose2d);
    return score(predict(model, poses, intr, opts), data);
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

std::string EvalReport::to_csv() const {
    std::string s = "sample,root_u,root_v,mpjpe_mm\n";
    for (std::size_t i = 0; i < per_sample.size(); ++i)
        s += std::to_string(i) + "," + fmt(root_position[i].x) + "," + fmt(root_position[i].y) +
             "," + fmt(per_sample[i]) + "\n";
    return s;
}

BinnedErrors binned_error_analysis(const EvalReport& report, int bins, double max_distance) {
    if (bins < 1) throw InvalidArgument("bin count must be positive");
    if (report.per_sample.size() != report.root_position.size())
        throw InvalidArgument("report lacks per-sample positions");
    std::vector<double> dist;
    for (const auto& p : report.root_position) dist.push_back(std::hypot(p.x - 0.5, p.y - 0.5));
    double hi = max_distance;
    if (!(hi > 0.0)) hi = dist.empty() ? 0.0 : *std::max_element(dist.begin(), dist.end());
    std::vector<std::size_t> count(bins, 0);
    std::vector<double> sum(bins, 0.0);
    for (std::size_t i = 0; i < dist.size(); ++i) {
        int b = hi > 0.0 ? static_cast<int>(std::floor(dist[i] / hi * bins)) : 0;
        b = std::clamp(b, 0, bins - 1);
        count[b]++;
        sum[b] += report.per_sample[i];
    }
    BinnedErrors out;
    const double width = hi > 0.0 ? hi / bins : 0.0;
    for (int b = 0; b < bins; ++b) {
        if (count[b] == 0) continue;
        out.bins.push_back({b * width, (b + 1) * width, count[b], sum[b] / count[b]});
    }
    if (out.bins.size() >= 2) {
        double mx = 0.0, my = 0.0;
        for (const auto& b : out.bins) {
            mx += 0.5 * (b.lo + b.hi);
            my += b.mean_mpjpe;
        }
        mx /= out.bins.size();
        my /= out.bins.size();
        double sxy = 0.0, sxx = 0.0;
        for (const auto& b : out.bins) {
            const double dx = 0.5 * (b.lo + b.hi) - mx;
            sxy += dx * (b.mean_mpjpe - my);
            sxx += dx * dx;
        }
        out.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    }
    return out;
}

std::string BinnedErrors::to_csv() const {
    std::string s = "bin_lo,bin_hi,count,mean_mpjpe_mm\n";
    for (const auto& b : bins)
        s += fmt(b.lo) + "," + fmt(b.hi) + "," + std::to_string(b.count) + "," + fmt(b.mean_mpjpe) + "\n";
    return s;
}

std::vector<FocalSweepRow> focal_robustness_sweep(const LiftingModel& model,
                                                  const std::vector<LabeledPose>& data,
                                                  const CameraIntrinsics& intr,
                                                  const std::vector<double>& multipliers) {
    std::vector<FocalSweepRow> rows;
    for (double m : multipliers) {
        EvalOptions o;
        o.focal_multiplier = m;
        rows.push_back({m, evaluate(model, data, intr, o).mpjpe});
    }
    return rows;
}

EvalReport rotation_ablation(const LiftingModel& rc_model, const std::vector<LabeledPose>& data,
                             const CameraIntrinsics& intr, RotationMode mode) {
    if (rc_model.config.preprocessing != Preprocessing::RC)
        throw InvalidArgument("rotation ablation needs an RC-trained model");
    EvalOptions o;
    o.rotation = mode;
    return evaluate(rc_model, data, intr, o);
}

std::vector<CapacityRow> capacity_sweep(const std::vector<LabeledPose>& train_data,
                                        const std::vector<LabeledPose>& test_data,
                                        const CameraIntrinsics& intr, const TrainConfig& base,
                                        const std::vector<int>& widths) {
    if (widths.empty()) throw InvalidArgument("capacity sweep needs at least one width");
    for (int w : widths)
        if (w < 1) throw InvalidArgument("widths must be positive");
    check_dataset(train_data);
    const int in = static_cast<int>(2 * train_data.front().pose2d.size());
    const int out = static_cast<int>(3 * train_data.front().pose2d.size());
    std::vector<CapacityRow> rows;
    auto run = [&](Preprocessing mode, int width) {
        TrainConfig c = base;
        c.preprocessing = mode;
        c.hidden = width;
        const TrainResult r = train(train_data, intr, c);
        rows.push_back({mode, width, Mlp<float>::parameter_count(in, width, out),
                        evaluate(r.model, test_data, intr).mpjpe});
    };
    run(Preprocessing::RC, *std::max_element(widths.begin(), widths.end()));
    for (int w : widths) run(Preprocessing::PCL, w);
    return rows;
}

std::string focal_sweep_csv(const std::vector<FocalSweepRow>& rows) {
    std::string s = "multiplier,mpjpe_mm\n";
    for (const auto& r : rows) s += fmt(r.multiplier) + "," + fmt(r.mpjpe) + "\n";
    return s;
}

std::string capacity_csv(const std::vector<CapacityRow>& rows) {
    std::string s = "mode,width,parameters,mpjpe_mm\n";
    for (const auto& r : rows)
        s += to_string(r.mode) + "," + std::to_string(r.width) + "," + std::to_string(r.parameters) +
             "," + fmt(r.mpjpe) + "\n";
    return s;
}

} // namespace perspcrop
