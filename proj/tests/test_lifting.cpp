#include <doctest.h>

#include <cmath>

#include "perspcrop/lifting.hpp"

using namespace perspcrop;

namespace {

const CameraIntrinsics kCam(0.6, 0.6, 0.5, 0.5, 1000, 1000);

// A figure whose pelvis projects exactly onto the principal point.
LabeledPose centered_figure(std::uint64_t seed) {
    DatasetSpec s = DatasetSpec::figure_defaults();
    s.count = 1;
    s.placement = Placement::Centered;
    s.seed = seed;
    return gen_figure_dataset(s).front();
}

std::vector<LabeledPose> figures(std::size_t n, std::uint64_t seed) {
    DatasetSpec s = DatasetSpec::figure_defaults();
    s.count = n;
    s.seed = seed;
    return gen_figure_dataset(s);
}

NormStats unit_stats(Eigen::Index in, Eigen::Index out) {
    return {Eigen::VectorXd::Zero(in), Eigen::VectorXd::Ones(in), Eigen::VectorXd::Zero(out),
            Eigen::VectorXd::Ones(out)};
}

} // namespace

TEST_CASE("preprocessing at the image center") {
    const LabeledPose s = centered_figure(3);
    const KeypointCropOptions opts;
    const Preprocessed rc = preprocess(s.pose2d, Preprocessing::RC, kCam, opts);
    const Preprocessed pcl = preprocess(s.pose2d, Preprocessing::PCL, kCam, opts);
    CHECK(rc.features[0] == 0.0);
    CHECK(rc.features[1] == 0.0);
    CHECK(pcl.features[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(pcl.features[1] == doctest::Approx(0.5).epsilon(1e-12));
    for (Eigen::Index i = 0; i < rc.features.size(); ++i)
        CHECK(std::abs(pcl.features[i] - 0.5 - rc.features[i]) < 1e-9);

    SUBCASE("equal network outputs give equal poses") {
        Eigen::VectorXd y(51);
        for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = std::sin(0.3 * i);
        const NormStats st = unit_stats(34, 51);
        const Pose3D a = postprocess(y, st, rc.context), b = postprocess(y, st, pcl.context);
        for (std::size_t j = 0; j < a.size(); ++j) CHECK((a.joints[j].vec() - b.joints[j].vec()).norm() < 1e-7);
    }
}

TEST_CASE("label encoding round trips through postprocessing") {
    const NormStats st = unit_stats(34, 51);
    for (const LabeledPose& s : figures(20, 4)) {
        for (Preprocessing mode : {Preprocessing::RC, Preprocessing::PCL}) {
            const Preprocessed p = preprocess(s.pose2d, mode, kCam, {});
            const Pose3D back = postprocess(encode_label(s.pose3d, p.context), st, p.context);
            const Pose3D want = s.pose3d.centered();
            for (std::size_t j = 0; j < want.size(); ++j)
                CHECK((back.joints[j].vec() - want.joints[j].vec()).norm() < 1e-9);
        }
    }
}

TEST_CASE("zero network output is the mean pose") {
    const LabeledPose s = centered_figure(1);
    const Preprocessed p = preprocess(s.pose2d, Preprocessing::RC, kCam, {});
    NormStats st = unit_stats(34, 51);
    for (Eigen::Index i = 0; i < 51; ++i) st.out_mean[i] = 10.0 * i;
    const Pose3D out = postprocess(Eigen::VectorXd::Zero(51), st, p.context);
    CHECK(out.joints[2].x == 60.0);
    CHECK(out.joints[2].z == 80.0);
}

TEST_CASE("normalization statistics") {
    Eigen::MatrixXd x(3, 2), y(3, 1);
    x << 1, 5, 2, 5, 3, 5;
    y << -1, 0, 1;
    const NormStats n = NormStats::compute(x, y);
    CHECK(n.in_mean[0] == doctest::Approx(2.0));
    CHECK(n.in_std[0] == doctest::Approx(std::sqrt(2.0 / 3.0)));
    CHECK(n.in_std[1] == 1.0);   // constant column
    const Eigen::VectorXd z = n.standardize_output(Eigen::VectorXd::Constant(1, 0.5));
    CHECK(n.unstandardize_output(z)[0] == doctest::Approx(0.5));
    CHECK(NormStats::from_json(n.to_json()).in_std == n.in_std);
    CHECK_THROWS_AS(NormStats::compute(Eigen::MatrixXd(0, 2), Eigen::MatrixXd(0, 1)), InvalidArgument);
}

TEST_CASE("metrics") {
    Pose3D gt{{}, 0};
    for (int j = 0; j < 17; ++j) gt.joints.push_back({10.0 * j, -5.0 * j, 3000.0 + j});
    CHECK(mpjpe(gt, gt) == 0.0);
    CHECK(pck(gt, gt, 50) == 100.0);

    Pose3D shifted = gt;
    for (auto& j : shifted.joints) j.x += 123.0;
    CHECK(mpjpe(shifted, gt) == doctest::Approx(0.0));

    Pose3D one_off = gt;
    one_off.joints[5].y += 5.0;
    CHECK(mpjpe(one_off, gt) == doctest::Approx(5.0 / 17.0));
    CHECK(mpjpe(gt, one_off) == mpjpe(one_off, gt));

    Pose3D noisy = gt;
    for (std::size_t j = 1; j < 17; ++j) noisy.joints[j].z += 20.0 * j;
    double prev = -1.0;
    for (double t : {10.0, 50.0, 100.0, 200.0, 400.0}) {
        const double v = pck(noisy, gt, t);
        CHECK(v >= prev);
        CHECK(v >= 0.0);
        CHECK(v <= 100.0);
        prev = v;
    }
    CHECK_THROWS_AS(mpjpe(Pose3D{}, Pose3D{}), InvalidArgument);
}

TEST_CASE("score of exact predictions") {
    const auto data = figures(5, 2);
    std::vector<Pose3D> pred;
    for (const auto& d : data) pred.push_back(d.pose3d);
    const EvalReport r = score(pred, data);
    CHECK(r.mpjpe == 0.0);
    CHECK(r.pck50 == 100.0);
    CHECK(r.pck100 == 100.0);
    CHECK(r.per_sample.size() == 5);
    CHECK(r.to_csv().rfind("sample,root_u,root_v,mpjpe_mm\n", 0) == 0);
}

TEST_CASE("binned error analysis") {
    EvalReport r;
    for (int i = 0; i < 40; ++i) {
        const double d = 0.01 * i + 0.005;   // keep off the bin edges
        r.root_position.push_back({0.5 + d, 0.5});
        r.per_sample.push_back(100.0 + 50.0 * d);
    }
    const BinnedErrors b = binned_error_analysis(r, 4, 0.4);
    std::size_t total = 0;
    for (const auto& bin : b.bins) total += bin.count;
    CHECK(total == 40);
    CHECK(b.slope == doctest::Approx(50.0));

    EvalReport centered;
    for (int i = 0; i < 7; ++i) {
        centered.root_position.push_back({0.5, 0.5});
        centered.per_sample.push_back(i);
    }
    const BinnedErrors c = binned_error_analysis(centered, 5);
    CHECK(c.bins.size() == 1);
    CHECK(c.bins[0].count == 7);
    CHECK(c.slope == 0.0);

    EvalReport gap;
    gap.root_position = {{0.5, 0.5}, {0.9, 0.5}};
    gap.per_sample = {1.0, 2.0};
    CHECK(binned_error_analysis(gap, 4, 0.4).bins.size() == 2);   // empty bins left out
    CHECK_THROWS_AS(binned_error_analysis(gap, 0), InvalidArgument);
}

TEST_CASE("training") {
    TrainConfig cfg;
    cfg.hidden = 16;
    cfg.epochs = 3;
    cfg.batch_size = 16;
    cfg.seed = 5;
    const auto data = figures(120, 9);

    SUBCASE("deterministic under the seed") {
        const TrainResult a = train(data, kCam, cfg), b = train(data, kCam, cfg);
        REQUIRE(a.curve.size() == 3);
        for (std::size_t i = 0; i < a.curve.size(); ++i) {
            CHECK(a.curve[i].train_loss == b.curve[i].train_loss);
            CHECK(a.curve[i].val_loss == b.curve[i].val_loss);
        }
        CHECK(a.model.net.parameters() == b.model.net.parameters());
        cfg.seed = 6;
        CHECK(train(data, kCam, cfg).model.net.parameters() != a.model.net.parameters());
    }
    SUBCASE("identical samples are memorized") {
        const std::vector<LabeledPose> same(64, data[0]);
        cfg.epochs = 200;
        cfg.preprocessing = Preprocessing::PCL;
        const TrainResult r = train(same, kCam, cfg);
        CHECK(r.curve.back().train_loss < 1.0);   // mm^2 summed over coordinates
        CHECK(evaluate(r.model, {data[0]}, kCam).mpjpe < 1.0);
    }
    SUBCASE("invalid inputs") {
        CHECK_THROWS_AS(train({}, kCam, cfg), InvalidArgument);
        cfg.learning_rate = 0.0;
        CHECK_THROWS_AS(train(data, kCam, cfg), InvalidArgument);
    }
    SUBCASE("divergence is reported") {
        cfg.learning_rate = 1e30;
        cfg.epochs = 20;
        CHECK_THROWS_AS(train(data, kCam, cfg), NonFiniteLoss);
    }
    SUBCASE("model json round trip predicts identically") {
        const TrainResult r = train(data, kCam, cfg);
        const LiftingModel back = LiftingModel::from_json(nlohmann::json::parse(r.model.to_json().dump()));
        const EvalReport a = evaluate(r.model, data, kCam), b = evaluate(back, data, kCam);
        CHECK(a.per_sample == b.per_sample);
    }
}

TEST_CASE("evaluation options") {
    TrainConfig cfg;
    cfg.hidden = 16;
    cfg.epochs = 2;
    const auto data = figures(80, 12);
    cfg.preprocessing = Preprocessing::RC;
    const TrainResult rc = train(data, kCam, cfg);

    SUBCASE("rotation none is the plain evaluation") {
        CHECK(rotation_ablation(rc.model, data, kCam, RotationMode::None).per_sample ==
              evaluate(rc.model, data, kCam).per_sample);
    }
    SUBCASE("centered test set makes every rotation mode equal") {
        std::vector<LabeledPose> centered;
        for (std::uint64_t s = 0; s < 10; ++s) centered.push_back(centered_figure(s));
        const double none = rotation_ablation(rc.model, centered, kCam, RotationMode::None).mpjpe;
        CHECK(std::abs(rotation_ablation(rc.model, centered, kCam, RotationMode::XOnly).mpjpe - none) < 1e-9);
        CHECK(std::abs(rotation_ablation(rc.model, centered, kCam, RotationMode::XYFull).mpjpe - none) < 1e-9);
    }
    SUBCASE("focal multiplier one is the plain evaluation") {
        cfg.preprocessing = Preprocessing::PCL;
        const TrainResult pcl = train(data, kCam, cfg);
        CHECK(focal_robustness_sweep(pcl.model, data, kCam, {1.0})[0].mpjpe == evaluate(pcl.model, data, kCam).mpjpe);
        CHECK_THROWS_AS(rotation_ablation(pcl.model, data, kCam, RotationMode::XOnly), InvalidArgument);
    }
}

TEST_CASE("capacity sweep layout") {
    TrainConfig cfg;
    cfg.epochs = 1;
    const auto data = figures(60, 13);
    const auto rows = capacity_sweep(data, data, kCam, cfg, {8, 16});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].mode == Preprocessing::RC);
    CHECK(rows[0].width == 16);
    CHECK(rows[1].width == 8);
    CHECK(rows[2].width == 16);
    CHECK(rows[1].parameters == Mlp<float>::parameter_count(34, 8, 51));
    CHECK_THROWS_AS(capacity_sweep(data, data, kCam, cfg, {}), InvalidArgument);
    CHECK(capacity_csv(rows).rfind("mode,width,parameters,mpjpe_mm\n", 0) == 0);
}

TEST_CASE("config json") {
    TrainConfig c;
    c.preprocessing = Preprocessing::RC;
    c.hidden = 77;
    c.rotation = RotationMode::XOnly;
    const TrainConfig back = TrainConfig::from_json(nlohmann::json::parse(c.to_json().dump()));
    CHECK(back.to_json() == c.to_json());
    CHECK(TrainConfig::from_json(nlohmann::json::object()).to_json() == TrainConfig{}.to_json());
    CHECK_THROWS_AS(TrainConfig::from_json(nlohmann::json{{"epoch", 3}}), InvalidArgument);
    CHECK_THROWS_AS(TrainConfig::from_json(nlohmann::json{{"epochs", -3}}), InvalidArgument);
    CHECK_THROWS_AS(TrainConfig::from_json(nlohmann::json{{"epochs", "many"}}), InvalidArgument);
}
