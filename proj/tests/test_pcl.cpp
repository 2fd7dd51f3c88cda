#include <doctest.h>

#include <cmath>

#include "perspcrop/crop.hpp"
#include "perspcrop/random.hpp"

using namespace perspcrop;

namespace {

const double kS = std::sqrt(0.5);

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

Pose2D square(double cx, double cy, double half) {
    return {{{cx - half, cy - half}, {cx + half, cy - half}, {cx + half, cy + half},
             {cx - half, cy + half}, {cx, cy}},
            4};
}

} // namespace

TEST_CASE("crop target validation") {
    CHECK_THROWS_AS(CropTarget({0, 0}, {0, 1}), InvalidArgument);
    CHECK_THROWS_AS(CropTarget({0, 0}, {1, -1}), InvalidArgument);
    CHECK_THROWS_AS(CropTarget({NAN, 0}, {1, 1}), InvalidArgument);
    CHECK(CropTarget({0, 0}, {1, 1}).p_norm() == 1.0);
    CHECK(CropTarget({0.3, -0.4}, {1, 1}).p_norm() > 1.0);
}

TEST_CASE("rotation from target") {
    SUBCASE("center gives the identity") {
        CHECK(max_abs(rotation_from_target({0, 0}).matrix() - Eigen::Matrix3d::Identity()) == 0.0);
    }
    SUBCASE("p = (1, 0)") {
        Eigen::Matrix3d want;
        want << kS, 0, kS, 0, 1, 0, -kS, 0, kS;
        CHECK(max_abs(rotation_from_target({1, 0}).matrix() - want) < 1e-15);
    }
    SUBCASE("optical axis pierces p") {
        const Eigen::Vector3d axis = rotation_from_target({0.3, -0.4}) * Eigen::Vector3d::UnitZ();
        CHECK((axis - Eigen::Vector3d(0.3, -0.4, 1.0) / std::sqrt(1.25)).norm() < 1e-15);
    }
    SUBCASE("factors compose to the full rotation") {
        Rng rng(5);
        for (int i = 0; i < 100; ++i) {
            const Eigen::Vector2d p(rng.uniform(-3, 3), rng.uniform(-3, 3));
            const Eigen::Matrix3d full = rotation_from_target(p).matrix();
            const Eigen::Matrix3d prod =
                pan_rotation_from_target(p).matrix() * tilt_rotation_from_target(p).matrix();
            CHECK(max_abs(full - prod) < 1e-14);
        }
    }
}

TEST_CASE("virtual focal per option") {
    const CameraIntrinsics k(0.6, 0.5, 0.5, 0.5, 100, 100);
    SUBCASE("all options agree at the center") {
        for (FocalOption o : {FocalOption::A, FocalOption::B, FocalOption::C}) {
            const Eigen::Vector2d h = virtual_focal(CropTarget({0, 0}, {1, 1}), k, o);
            CHECK(h.x() == doctest::Approx(0.6));
            CHECK(h.y() == doctest::Approx(0.5));
        }
    }
    SUBCASE("p = (1, 0)") {
        const CropTarget t({1, 0}, {1, 1});
        const Eigen::Vector2d c = virtual_focal(t, k, FocalOption::C);
        CHECK(c.x() == doctest::Approx(2 * 0.6).epsilon(1e-14));
        CHECK(c.y() == doctest::Approx(std::sqrt(2.0) * 0.5).epsilon(1e-14));
        const Eigen::Vector2d b = virtual_focal(t, k, FocalOption::B);
        CHECK(b.x() == doctest::Approx(std::sqrt(2.0) * 0.6).epsilon(1e-14));
        CHECK(b.y() == doctest::Approx(std::sqrt(2.0) * 0.5).epsilon(1e-14));
        CHECK(virtual_focal(t, k, FocalOption::A) == k.focal());
    }
}

TEST_CASE("virtual camera") {
    const CameraIntrinsics k(0.6, 0.5, 0.45, 0.55, 100, 80);
    SUBCASE("unit scale at the center with option A keeps K apart from the principal point") {
        const VirtualCamera vc = build_virtual_camera(CropTarget({0, 0}, {1, 1}), k, FocalOption::A);
        CHECK(vc.intr.fx() == k.fx());
        CHECK(vc.intr.fy() == k.fy());
        CHECK(vc.intr.cx() == 0.5);
        CHECK(vc.intr.cy() == 0.5);
    }
    SUBCASE("half scale zooms by two") {
        const VirtualCamera vc = build_virtual_camera(CropTarget({0, 0}, {0.5, 0.5}), k, FocalOption::C);
        CHECK(vc.intr.fx() == doctest::Approx(1.2));
        CHECK(vc.intr.fy() == doctest::Approx(1.0));
    }
    SUBCASE("aspect rule takes the smaller focal length") {
        const VirtualCamera vc =
            build_virtual_camera(CropTarget({0, 0}, {0.5, 1.0}), k, FocalOption::C, true);
        const double want = std::min(2 * k.fx(), k.fy());
        CHECK(vc.intr.fx() == doctest::Approx(want));
        CHECK(vc.intr.fy() == doctest::Approx(want));
    }
    SUBCASE("third rotation column is the normalized target") {
        const VirtualCamera vc =
            build_virtual_camera(CropTarget({-0.7, 0.2}, {0.3, 0.2}), k, FocalOption::B);
        const Eigen::Vector3d col = vc.rotation.matrix().col(2);
        CHECK((col - Eigen::Vector3d(-0.7, 0.2, 1).normalized()).norm() < 1e-12);
    }
}

TEST_CASE("warp matrix") {
    SUBCASE("identity configuration") {
        const CameraIntrinsics k(0.7, 0.7, 0.5, 0.5, 100, 100);
        const VirtualCamera vc = build_virtual_camera(CropTarget({0, 0}, {1, 1}), k, FocalOption::A);
        CHECK(max_abs(warp_matrix(vc, k).m - Eigen::Matrix3d::Identity()) < 1e-15);
    }
    SUBCASE("center mapping and round trip") {
        const CameraIntrinsics k(0.55, 0.65, 0.47, 0.52, 100, 100);
        const CropTarget t({0.6, -0.3}, {0.25, 0.4});
        const VirtualCamera vc = build_virtual_camera(t, k, FocalOption::C);
        const WarpMatrix w = warp_matrix(vc, k);
        const ImagePoint c = warp_point(w, project(Eigen::Vector3d(0.6, -0.3, 1.0), k));
        CHECK(c.x == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(c.y == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(max_abs(w.m * w.m_inv - Eigen::Matrix3d::Identity()) < 1e-12);
        const ImagePoint q{0.2, 0.9};
        const ImagePoint back = warp_point(w.inverse(), warp_point(w, q));
        CHECK(std::hypot(back.x - q.x, back.y - q.y) < 1e-9);
    }
    SUBCASE("point at infinity") {
        WarpMatrix w = WarpMatrix::identity();
        w.m.row(2) << 1.0, 0.0, -0.5;
        CHECK_THROWS_AS(warp_point(w, {0.5, 0.3}), PointAtInfinity);
    }
}

TEST_CASE("keypoint crop") {
    const CameraIntrinsics k(0.6, 0.6, 0.5, 0.5, 100, 100);
    SUBCASE("square bounding box gives its extent") {
        const Eigen::Vector2d s = bbox_scale(square(0.3, 0.6, 0.1), 0.0);
        CHECK(s.x() == doctest::Approx(0.2));
        CHECK(s.y() == doctest::Approx(0.2));
        CHECK(bbox_scale(square(0.3, 0.6, 0.1), 0.1).x() == doctest::Approx(0.22));
    }
    SUBCASE("root lands on the patch center") {
        const KeypointCrop c = pcl_keypoints(square(0.8, 0.25, 0.05), k);
        CHECK(c.pose.joints[4].x == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(c.pose.joints[4].y == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("centroid target when there is no root") {
        Pose2D p = square(0.7, 0.7, 0.1);
        p.root.reset();
        const KeypointCrop c = pcl_keypoints(p, k);
        CHECK(c.camera.target.x() == doctest::Approx((0.7 - 0.5) / 0.6));
    }
    SUBCASE("degenerate boxes") {
        const Pose2D line{{{0.1, 0.5}, {0.9, 0.5}}, 0};
        CHECK_THROWS_AS(pcl_keypoints(line, k), DegenerateBoundingBox);
        CHECK_THROWS_AS(rc_crop(line), DegenerateBoundingBox);
        const Pose2D single{{{0.4, 0.4}}, 0};
        CHECK_THROWS_AS(bbox_scale(single, 0.1), DegenerateBoundingBox);
    }
    SUBCASE("centered pose matches the rectangular crop up to the patch center") {
        const KeypointCropOptions opts{FocalOption::C, 0.1, false, false};
        const Pose2D p = square(0.5, 0.5, 0.1);
        const KeypointCrop c = pcl_keypoints(p, k, opts);
        const Pose2D r = rc_crop(p, 0.1);
        for (std::size_t i = 0; i < p.size(); ++i) {
            CHECK(c.pose.joints[i].x - 0.5 == doctest::Approx(r.joints[i].x).epsilon(1e-12));
            CHECK(c.pose.joints[i].y - 0.5 == doctest::Approx(r.joints[i].y).epsilon(1e-12));
        }
    }
    SUBCASE("position changes the warped shape") {
        const KeypointCrop a = pcl_keypoints(square(0.5, 0.5, 0.1), k);
        const KeypointCrop b = pcl_keypoints(square(0.85, 0.2, 0.1), k);
        double diff = 0.0;
        for (std::size_t i = 0; i < 5; ++i)
            diff = std::max(diff, std::abs(a.pose.joints[i].x - b.pose.joints[i].x) +
                                      std::abs(a.pose.joints[i].y - b.pose.joints[i].y));
        CHECK(diff > 1e-3);
        const Pose2D ra = rc_crop(square(0.5, 0.5, 0.1)), rb = rc_crop(square(0.85, 0.2, 0.1));
        for (std::size_t i = 0; i < 5; ++i) {
            CHECK(ra.joints[i].x == doctest::Approx(rb.joints[i].x).epsilon(1e-12));
            CHECK(ra.joints[i].y == doctest::Approx(rb.joints[i].y).epsilon(1e-12));
        }
    }
}

TEST_CASE("rectangular crop") {
    const Pose2D p{{{0.2, 0.3}, {0.4, 0.7}, {0.3, 0.5}}, 2};
    const Pose2D r = rc_crop(p, 0.0);
    CHECK(std::abs(r.joints[2].x) < 1e-15);
    CHECK(std::abs(r.joints[2].y) < 1e-15);
    CHECK(r.joints[0].x == doctest::Approx(-0.1 / 0.2));
    CHECK(r.joints[0].y == doctest::Approx(-0.2 / 0.4));
    Pose2D moved = p;
    for (auto& j : moved.joints) {
        j.x += 0.125;
        j.y -= 0.25;
    }
    const Pose2D rm = rc_crop(moved, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(rm.joints[i].x == doctest::Approx(r.joints[i].x).epsilon(1e-14));
        CHECK(rm.joints[i].y == doctest::Approx(r.joints[i].y).epsilon(1e-14));
    }
}

TEST_CASE("affine crop matrix") {
    const AffineCrop c{{0.1, 0.2}, {2.0, 3.0}, {0.5, 0.25}};
    const Eigen::Matrix3d m = c.as_matrix();
    CHECK(m(2, 0) == 0.0);
    CHECK(m(2, 1) == 0.0);
    CHECK(m(2, 2) == 1.0);
    CHECK(c.invertible());
    CHECK_FALSE(AffineCrop{{0, 0}, {1.0, 1.0}, {1.0, 1.0}}.invertible());
    const ImagePoint q = c.apply({1.0, 1.0});
    CHECK(q.x == doctest::Approx(2.0 + 0.5 + 0.1));
    CHECK(q.y == doctest::Approx(0.25 + 3.0 + 0.2));
}

TEST_CASE("sequence crop") {
    const CameraIntrinsics k(0.6, 0.6, 0.5, 0.5, 100, 100);
    SUBCASE("single frame equals the keypoint crop") {
        const Pose2D p = square(0.7, 0.3, 0.08);
        const SequenceCrop s = pcl_keypoint_sequence({p}, k);
        const KeypointCrop c = pcl_keypoints(p, k);
        CHECK(s.middle == 0);
        for (std::size_t i = 0; i < p.size(); ++i) CHECK(s.poses[0].joints[i] == c.pose.joints[i]);
    }
    SUBCASE("moving pose uses the middle frame") {
        std::vector<Pose2D> seq;
        for (int f = 0; f < 4; ++f) seq.push_back(square(0.3 + 0.1 * f, 0.4, 0.05));
        const SequenceCrop s = pcl_keypoint_sequence(seq, k);
        CHECK(s.middle == 2);
        CHECK(s.poses[2].joints[4].x == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(s.poses[0].joints[4].x != doctest::Approx(0.5));
    }
    SUBCASE("constant pose gives identical frames") {
        const std::vector<Pose2D> seq(5, square(0.2, 0.8, 0.05));
        const SequenceCrop s = pcl_keypoint_sequence(seq, k);
        for (const auto& f : s.poses) CHECK(f.joints == s.poses[0].joints);
    }
    SUBCASE("empty sequence") {
        CHECK_THROWS_AS(pcl_keypoint_sequence({}, k), InvalidArgument);
    }
}

TEST_CASE("inverse rotation of 3D poses") {
    const CameraIntrinsics k(0.6, 0.6, 0.5, 0.5, 100, 100);
    const Pose3D joint{{{0, 0, 1000}}, 0};
    SUBCASE("p = (1, 0)") {
        const VirtualCamera vc = build_virtual_camera(CropTarget({1, 0}, {1, 1}), k, FocalOption::C);
        const Pose3D out = pcl_inv(joint, vc);
        CHECK(out.joints[0].x == doctest::Approx(1000 * kS).epsilon(1e-14));
        CHECK(out.joints[0].y == doctest::Approx(0.0));
        CHECK(out.joints[0].z == doctest::Approx(1000 * kS).epsilon(1e-14));
        CHECK(pcl_inv_partial(joint, vc, RotationMode::XOnly).joints[0] == joint.joints[0]);
    }
    SUBCASE("center is the identity") {
        const VirtualCamera vc = build_virtual_camera(CropTarget({0, 0}, {1, 1}), k, FocalOption::C);
        CHECK(pcl_inv(joint, vc).joints[0] == joint.joints[0]);
    }
    SUBCASE("partial modes") {
        const Pose3D pose{{{10, 20, 30}, {-40, 5, 60}}, 0};
        const VirtualCamera vy = build_virtual_camera(CropTarget({0, 0.7}, {1, 1}), k, FocalOption::C);
        const Pose3D a = pcl_inv_partial(pose, vy, RotationMode::XOnly);
        const Pose3D b = pcl_inv_partial(pose, vy, RotationMode::XYFull);
        for (std::size_t i = 0; i < 2; ++i)
            CHECK((a.joints[i].vec() - b.joints[i].vec()).norm() < 1e-12);
        const VirtualCamera vc = build_virtual_camera(CropTarget({0.4, -0.9}, {1, 1}), k, FocalOption::C);
        CHECK(pcl_inv_partial(pose, vc, RotationMode::XYFull).joints == pcl_inv(pose, vc).joints);
        CHECK(pcl_inv_partial(pose, vc, RotationMode::None).joints == pose.joints);
    }
    SUBCASE("rigidity") {
        Rng rng(9);
        Pose3D pose;
        for (int i = 0; i < 17; ++i)
            pose.joints.push_back({rng.uniform(-500, 500), rng.uniform(-900, 900), rng.uniform(-300, 300)});
        const VirtualCamera vc = build_virtual_camera(CropTarget({-1.2, 0.8}, {1, 1}), k, FocalOption::C);
        const Pose3D out = pcl_inv(pose, vc);
        for (int i = 0; i < 17; ++i)
            for (int j = i + 1; j < 17; ++j) {
                const double d0 = (pose.joints[i].vec() - pose.joints[j].vec()).norm();
                const double d1 = (out.joints[i].vec() - out.joints[j].vec()).norm();
                CHECK(std::abs(d0 - d1) < 1e-9);
            }
    }
}

TEST_CASE("option and mode names") {
    CHECK(parse_focal_option("c") == FocalOption::C);
    CHECK(parse_focal_option("A") == FocalOption::A);
    CHECK_THROWS_AS(parse_focal_option("D"), InvalidArgument);
    for (RotationMode m : {RotationMode::None, RotationMode::XOnly, RotationMode::XYFull})
        CHECK(parse_rotation_mode(to_string(m)) == m);
    CHECK_THROWS_AS(parse_rotation_mode("z_only"), InvalidArgument);
}
