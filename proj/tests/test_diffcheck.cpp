#include <doctest.h>

#include <cmath>

#include "perspcrop/diffcheck.hpp"
#include "perspcrop/random.hpp"

using namespace perspcrop;

TEST_CASE("finite differences") {
    SUBCASE("square") {
        const Jacobian j = finite_difference(
            [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, x[0] * x[0]); },
            Eigen::VectorXd::Constant(1, 3.0), 1e-5);
        CHECK(std::abs(j.entries(0, 0) - 6.0) < 1e-9);
    }
    SUBCASE("linear map is exact for any step") {
        Eigen::Matrix<double, 2, 3> a;
        a << 1, -2, 0.5, 3, 0.25, -1;
        const VectorFunction f = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return a * x; };
        for (double h : {1e-3, 0.5, 2.0}) {
            const Jacobian j = finite_difference(f, Eigen::Vector3d(0.1, 0.2, 0.3), h);
            CHECK((j.entries - a).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    SUBCASE("sine at zero") {
        const double h = 1e-2;
        const Jacobian j = finite_difference(
            [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, std::sin(x[0])); },
            Eigen::VectorXd::Zero(1), h);
        CHECK(std::abs(j.entries(0, 0) - (1.0 - h * h / 6)) < 1e-9);
    }
}

TEST_CASE("relative error metric") {
    Eigen::MatrixXd a(1, 3), n(1, 3);
    a << 1.0, 0.0, 1e-9;
    n << 1.1, 0.0, 2e-9;
    // 0.1 / 1.1 for the first entry; the tiny pair is judged against the floor.
    CHECK(max_relative_error(a, n) == doctest::Approx(0.1 / 1.1));
    CHECK(max_relative_error(a, a) == 0.0);
}

TEST_CASE("rotation partials") {
    SUBCASE("small-angle behaviour at the origin") {
        const Jacobian j = d_rotation_d_p({0, 0});
        REQUIRE(j.rows() == 9);
        REQUIRE(j.cols() == 2);
        CHECK(j.entries(2, 0) == doctest::Approx(1.0));   // R13 / px
        CHECK(j.entries(5, 1) == doctest::Approx(1.0));   // R23 / py
    }
    SUBCASE("R22 does not move with px on the horizontal axis") {
        for (double a : {-2.0, -0.3, 0.0, 0.7, 3.0}) CHECK(d_rotation_d_p({a, 0}).entries(4, 0) == 0.0);
    }
    SUBCASE("random targets against central differences") {
        Rng rng(4);
        for (int i = 0; i < 200; ++i) {
            const Eigen::Vector2d p(rng.uniform(-2, 2), rng.uniform(-2, 2));
            const Jacobian fd = finite_difference(
                [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
                    const Eigen::Matrix3d r = rotation_from_target({x[0], x[1]}).matrix();
                    Eigen::VectorXd out(9);
                    for (int k = 0; k < 9; ++k) out[k] = r(k / 3, k % 3);
                    return out;
                },
                p, kGeometryStep);
            CHECK(max_relative_error(d_rotation_d_p(p).entries, fd.entries) < 1e-6);
        }
    }
}

TEST_CASE("warp partials") {
    const CameraIntrinsics k(0.6, 0.6, 0.5, 0.5, 100, 100);
    SUBCASE("scale only moves the focal rows at the center") {
        const CropTarget t({0, 0}, {0.5, 0.25});
        const Jacobian j = d_warp_d_params(k, t, FocalOption::A);
        REQUIRE(j.cols() == 4);
        // Gamma(0,0) = fx_virt / fx = 1 / sx, so its derivative is -1 / sx^2.
        CHECK(j.entries(0, 2) == doctest::Approx(-1.0 / (0.5 * 0.5)));
        CHECK(j.entries(4, 3) == doctest::Approx(-1.0 / (0.25 * 0.25)));
        for (int c = 2; c < 4; ++c)
            for (int r = 6; r < 9; ++r) CHECK(j.entries(r, c) == 0.0);
    }
    SUBCASE("last row never depends on the scale") {
        Rng rng(8);
        for (int i = 0; i < 50; ++i) {
            const CropTarget t({rng.uniform(-1, 1), rng.uniform(-1, 1)},
                               {rng.uniform(0.1, 1), rng.uniform(0.1, 1)});
            const Jacobian j = d_warp_d_params(k, t, FocalOption::C);
            for (int c = 2; c < 4; ++c)
                for (int r = 6; r < 9; ++r) CHECK(j.entries(r, c) == 0.0);
        }
    }
    SUBCASE("the warped crop center ignores the scale") {
        const Eigen::Vector2d p(0.4, -0.6);
        const ImagePoint c = project(Eigen::Vector3d(p.x(), p.y(), 1.0), k);
        const Jacobian fd = finite_difference(
            [&](const Eigen::VectorXd& s) -> Eigen::VectorXd {
                const VirtualCamera vc = build_virtual_camera(CropTarget(p, {s[0], s[1]}), k, FocalOption::C);
                return warp_point(warp_matrix(vc, k), c).vec();
            },
            Eigen::Vector2d(0.3, 0.2), kGeometryStep);
        CHECK(fd.entries.cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("gradcheck on a small budget") {
    GradcheckOptions opts;
    opts.geometry_configs = 40;
    opts.image_configs = 1;
    opts.crop_size = 8;
    const auto entries = run_gradcheck(opts);
    CHECK(entries.size() >= 6);
    for (const auto& e : entries) {
        INFO(e.name << " max rel error " << e.max_rel_error);
        CHECK(e.checked > 0);
        CHECK(e.passed());
    }
}
