#include "perspcrop/synthetic.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "perspcrop/errors.hpp"
#include "perspcrop/random.hpp"

namespace perspcrop {

std::array<Eigen::Vector3d, 8> CubeInstance::vertices() const {
    std::array<Eigen::Vector3d, 8> out;
    const double h = edge / 2.0;
    for (int i = 0; i < 8; ++i) {
        const Eigen::Vector3d local((i & 1) ? h : -h, (i & 2) ? h : -h, (i & 4) ? h : -h);
        out[i] = center.vec() + orientation * local;
    }
    return out;
}

CubeInstance CubeInstance::in_frame(const Rotation3& r) const {
    const Rotation3 rt = r.transpose();
    return {MmPoint::from(rt * center.vec()), rt * orientation, edge};
}

void CubeInstance::validate() const {
    if (!(edge > 0.0)) throw InvalidArgument("cube edge must be positive");
    if (!(center.z > edge)) throw InvalidArgument("cube must lie in front of the camera");
}

// H3.6M-style ordering:
//  0 pelvis, 1 r-hip, 2 r-knee, 3 r-ankle, 4 l-hip, 5 l-knee, 6 l-ankle,
//  7 spine, 8 thorax, 9 neck, 10 head, 11 l-shoulder, 12 l-elbow,
//  13 l-wrist, 14 r-shoulder, 15 r-elbow, 16 r-wrist
const std::array<int, Skeleton::kJoints>& Skeleton::parents() {
    static const std::array<int, kJoints> p{-1, 0, 1, 2, 0, 4, 5, 0, 7, 8, 9, 8, 11, 12, 8, 14, 15};
    return p;
}

// Average adult proportions (mm).
const std::array<Eigen::Vector3d, Skeleton::kJoints>& Skeleton::rest_offsets() {
    static const std::array<Eigen::Vector3d, kJoints> o{
        Eigen::Vector3d(0, 0, 0),
        Eigen::Vector3d(-132, 0, 0), Eigen::Vector3d(0, 442, 0), Eigen::Vector3d(0, 454, 0),
        Eigen::Vector3d(132, 0, 0), Eigen::Vector3d(0, 442, 0), Eigen::Vector3d(0, 454, 0),
        Eigen::Vector3d(0, -233, 0), Eigen::Vector3d(0, -257, 0), Eigen::Vector3d(0, -121, 0),
        Eigen::Vector3d(0, -115, 0),
        Eigen::Vector3d(151, 0, 0), Eigen::Vector3d(278, 0, 0), Eigen::Vector3d(251, 0, 0),
        Eigen::Vector3d(-151, 0, 0), Eigen::Vector3d(-278, 0, 0), Eigen::Vector3d(-251, 0, 0)};
    return o;
}

std::vector<std::pair<int, int>> Skeleton::bones() {
    std::vector<std::pair<int, int>> out;
    for (std::size_t j = 1; j < kJoints; ++j) out.emplace_back(parents()[j], static_cast<int>(j));
    return out;
}

std::vector<double> Skeleton::bone_lengths() {
    std::vector<double> out;
    for (std::size_t j = 1; j < kJoints; ++j) out.push_back(rest_offsets()[j].norm());
    return out;
}

Pose3D StickFigure::pose() const { return {joints, root}; }

namespace {

Eigen::Matrix3d axis_angle(const Eigen::Vector3d& r) {
    const double angle = r.norm();
    if (angle == 0.0) return Eigen::Matrix3d::Identity();
    return Eigen::AngleAxisd(angle, r / angle).toRotationMatrix();
}

} // namespace

StickFigure articulate(const std::vector<Eigen::Vector3d>& local_rotations, double yaw,
                       double pitch, double roll) {
    if (local_rotations.size() != Skeleton::kJoints)
        throw InvalidArgument("expected one local rotation per joint");
    const auto& parents = Skeleton::parents();
    const auto& offsets = Skeleton::rest_offsets();
    std::array<Eigen::Matrix3d, Skeleton::kJoints> global;
    std::array<Eigen::Vector3d, Skeleton::kJoints> pos;
    global[0] = Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitZ()).toRotationMatrix() *
                Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitX()).toRotationMatrix() *
                Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()).toRotationMatrix() *
                axis_angle(local_rotations[0]);
    pos[0].setZero();
    for (std::size_t j = 1; j < Skeleton::kJoints; ++j) {
        const int p = parents[j];
        global[j] = global[p] * axis_angle(local_rotations[j]);
        pos[j] = pos[p] + global[j] * offsets[j];
    }
    StickFigure fig;
    for (const auto& v : pos) fig.joints.push_back(MmPoint::from(v));
    fig.bones = Skeleton::bones();
    fig.bone_lengths = Skeleton::bone_lengths();
    return fig;
}

const char* to_string(Placement p) { return p == Placement::Centered ? "centered" : "general"; }

Placement parse_placement(const std::string& s) {
    if (s == "centered") return Placement::Centered;
    if (s == "general") return Placement::General;
    throw InvalidArgument("unknown placement '" + s + "' (expected centered or general)");
}

DatasetSpec DatasetSpec::cube_defaults() {
    DatasetSpec s;
    s.ranges.depth_min = 2500.0;
    s.ranges.depth_max = 6000.0;
    s.ranges.region_min = 0.12;
    s.ranges.region_max = 0.88;
    return s;
}

DatasetSpec DatasetSpec::figure_defaults() { return DatasetSpec{}; }

void DatasetSpec::validate() const {
    const auto& r = ranges;
    if (count < 1) throw InvalidArgument("dataset count must be at least 1");
    if (!(r.depth_min > 0.0) || !(r.depth_max >= r.depth_min) || !std::isfinite(r.depth_max))
        throw InvalidArgument("depth range must satisfy 0 < min <= max");
    if (!(r.region_min >= 0.0) || !(r.region_max <= 1.0) || !(r.region_min <= r.region_max))
        throw InvalidArgument("placement region must lie within [0,1]");
    if (!(r.yaw_max_deg >= 0.0 && r.yaw_max_deg <= 180.0))
        throw InvalidArgument("yaw range must lie in [0,180] degrees");
    if (!(r.pitch_max_deg >= 0.0 && r.pitch_max_deg <= 90.0))
        throw InvalidArgument("pitch range must lie in [0,90] degrees");
    if (!(r.roll_max_deg >= 0.0 && r.roll_max_deg <= 180.0))
        throw InvalidArgument("roll range must lie in [0,180] degrees");
    if (!(r.articulation >= 0.0) || !std::isfinite(r.articulation))
        throw InvalidArgument("articulation must be non-negative");
    if (!(r.edge > 0.0) || !std::isfinite(r.edge)) throw InvalidArgument("cube edge must be positive");
    if (!(r.depth_min > r.edge)) throw InvalidArgument("cube depth must exceed its edge length");
}

namespace {

constexpr int kMaxRejections = 10000;

bool in_frame(const std::vector<Eigen::Vector3d>& pts, const CameraIntrinsics& intr) {
    for (const auto& p : pts) {
        if (!(p.z() > 0.0)) return false;
        const ImagePoint q = project(p, intr);
        if (q.x < 0.0 || q.x > 1.0 || q.y < 0.0 || q.y > 1.0) return false;
    }
    return true;
}

// Ray through the root's image position; the root is placed at the given depth on it.
Eigen::Vector3d root_ray(Rng& rng, const DatasetSpec& spec) {
    if (spec.placement == Placement::Centered) return {0.0, 0.0, 1.0};
    const double u = rng.uniform(spec.ranges.region_min, spec.ranges.region_max);
    const double v = rng.uniform(spec.ranges.region_min, spec.ranges.region_max);
    const PlanePoint q = backproject({u, v}, spec.camera);
    return q.vec();
}

Rotation3 random_rotation(Rng& rng) {
    Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    q.normalize();
    return Rotation3(q.toRotationMatrix());
}

LabeledPose label(const std::vector<Eigen::Vector3d>& pts, std::optional<std::size_t> root,
                  const CameraIntrinsics& intr) {
    LabeledPose out;
    out.pose2d.root = root;
    out.pose3d.root = root;
    for (const auto& p : pts) {
        out.pose3d.joints.push_back(MmPoint::from(p));
        out.pose2d.joints.push_back(project(p, intr));
    }
    return out;
}

// Local rotation limits per joint (radians, per axis). Entry j rotates the
// bone ending at joint j.
struct Limit {
    Eigen::Vector3d lo, hi;
};

const std::array<Limit, Skeleton::kJoints>& joint_limits() {
    using V = Eigen::Vector3d;
    static const std::array<Limit, Skeleton::kJoints> l{
        Limit{V(-0.15, 0.0, -0.15), V(0.15, 0.0, 0.15)},   // pelvis
        Limit{V::Zero(), V::Zero()},
        Limit{V(-0.9, -0.3, -0.3), V(0.9, 0.3, 0.5)},      // r thigh
        Limit{V(0.0, 0.0, 0.0), V(1.3, 0.0, 0.0)},         // r shin
        Limit{V::Zero(), V::Zero()},
        Limit{V(-0.9, -0.3, -0.5), V(0.9, 0.3, 0.3)},      // l thigh
        Limit{V(0.0, 0.0, 0.0), V(1.3, 0.0, 0.0)},         // l shin
        Limit{V(-0.3, -0.3, -0.2), V(0.3, 0.3, 0.2)},
        Limit{V(-0.2, -0.2, -0.2), V(0.2, 0.2, 0.2)},
        Limit{V(-0.3, -0.3, -0.3), V(0.3, 0.3, 0.3)},
        Limit{V(-0.3, -0.3, -0.3), V(0.3, 0.3, 0.3)},
        Limit{V(0.0, -0.1, -0.1), V(0.0, 0.1, 0.1)},
        Limit{V(-1.0, -0.6, -1.0), V(1.0, 0.6, 1.0)},      // l upper arm
        Limit{V(0.0, -1.5, 0.0), V(0.0, 0.2, 0.0)},        // l forearm
        Limit{V(0.0, -0.1, -0.1), V(0.0, 0.1, 0.1)},
        Limit{V(-1.0, -0.6, -1.0), V(1.0, 0.6, 1.0)},      // r upper arm
        Limit{V(0.0, -0.2, 0.0), V(0.0, 1.5, 0.0)},        // r forearm
    };
    return l;
}

} // namespace

std::vector<CubeSample> gen_cube_dataset(const DatasetSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    std::vector<CubeSample> out;
    out.reserve(spec.count);
    while (out.size() < spec.count) {
        const Eigen::Vector3d ray = root_ray(rng, spec);
        for (int attempt = 0;; ++attempt) {
            if (attempt == kMaxRejections)
                throw RejectionExhausted("no in-frame cube after 10000 consecutive samples");
            const double z = rng.uniform(spec.ranges.depth_min, spec.ranges.depth_max);
            CubeInstance cube{MmPoint::from(ray * z), random_rotation(rng), spec.ranges.edge};
            const auto v = cube.vertices();
            const std::vector<Eigen::Vector3d> pts(v.begin(), v.end());
            if (!in_frame(pts, spec.camera)) continue;
            out.push_back({cube, label(pts, std::nullopt, spec.camera)});
            break;
        }
    }
    return out;
}

std::vector<LabeledPose> gen_figure_dataset(const DatasetSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const auto& limits = joint_limits();
    const double yaw_max = spec.ranges.yaw_max_deg * std::numbers::pi / 180.0;
    const double pitch_max = spec.ranges.pitch_max_deg * std::numbers::pi / 180.0;
    const double roll_max = spec.ranges.roll_max_deg * std::numbers::pi / 180.0;
    std::vector<LabeledPose> out;
    out.reserve(spec.count);
    while (out.size() < spec.count) {
        const Eigen::Vector3d ray = root_ray(rng, spec);
        for (int attempt = 0;; ++attempt) {
            if (attempt == kMaxRejections)
                throw RejectionExhausted("no in-frame figure after 10000 consecutive samples");
            const double z = rng.uniform(spec.ranges.depth_min, spec.ranges.depth_max);
            const double yaw = rng.uniform(-yaw_max, yaw_max);
            const double pitch = rng.uniform(-pitch_max, pitch_max);
            const double roll = rng.uniform(-roll_max, roll_max);
            std::vector<Eigen::Vector3d> local(Skeleton::kJoints);
            for (std::size_t j = 0; j < Skeleton::kJoints; ++j)
                for (int a = 0; a < 3; ++a)
                    local[j][a] = spec.ranges.articulation *
                                  rng.uniform(limits[j].lo[a], limits[j].hi[a]);
            const StickFigure fig = articulate(local, yaw, pitch, roll);
            std::vector<Eigen::Vector3d> pts;
            for (const auto& j : fig.joints) pts.push_back(ray * z + j.vec());
            if (!in_frame(pts, spec.camera)) continue;
            out.push_back(label(pts, Skeleton::kRoot, spec.camera));
            break;
        }
    }
    return out;
}

std::vector<PoseRecord> to_records(const std::vector<LabeledPose>& data) {
    std::vector<PoseRecord> out;
    out.reserve(data.size());
    for (const auto& d : data) out.push_back({d.pose2d, d.pose3d});
    return out;
}

std::vector<LabeledPose> from_records(const std::vector<PoseRecord>& recs) {
    std::vector<LabeledPose> out;
    out.reserve(recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        if (!recs[i].pose3d)
            throw InvalidArgument("record " + std::to_string(i + 1) + " has no 3D joints");
        if (recs[i].pose3d->size() != recs[i].pose2d.size())
            throw InvalidArgument("record " + std::to_string(i + 1) + ": 2D/3D joint counts differ");
        out.push_back({recs[i].pose2d, *recs[i].pose3d});
    }
    return out;
}

} // namespace perspcrop
