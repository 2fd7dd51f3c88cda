#include "perspcrop/pose.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "perspcrop/io.hpp"

namespace perspcrop {

ImagePoint Pose2D::center() const {
    if (joints.empty()) throw InvalidArgument("empty 2D pose has no center");
    if (root) {
        if (*root >= joints.size()) throw InvalidArgument("root index out of range");
        return joints[*root];
    }
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    for (const auto& j : joints) sum += j.vec();
    return ImagePoint::from(sum / static_cast<double>(joints.size()));
}

Eigen::Vector3d Pose3D::center() const {
    if (joints.empty()) throw InvalidArgument("empty 3D pose has no center");
    if (root) {
        if (*root >= joints.size()) throw InvalidArgument("root index out of range");
        return joints[*root].vec();
    }
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (const auto& j : joints) sum += j.vec();
    return sum / static_cast<double>(joints.size());
}

Pose3D Pose3D::centered() const {
    const Eigen::Vector3d c = center();
    Pose3D out{{}, root};
    out.joints.reserve(joints.size());
    for (const auto& j : joints) out.joints.push_back(MmPoint::from(j.vec() - c));
    return out;
}

Box2 bounding_box(const Pose2D& pose) {
    if (pose.joints.empty()) throw InvalidArgument("bounding box of empty pose");
    Box2 b{pose.joints[0].vec(), pose.joints[0].vec()};
    for (const auto& j : pose.joints) {
        b.min = b.min.cwiseMin(j.vec());
        b.max = b.max.cwiseMax(j.vec());
    }
    return b;
}

std::string pose_record_to_json(const PoseRecord& rec) {
    nlohmann::ordered_json j;
    auto& j2 = j["joints2d"] = nlohmann::ordered_json::array();
    for (const auto& p : rec.pose2d.joints) j2.push_back({p.x, p.y});
    if (rec.pose3d) {
        auto& j3 = j["joints3d"] = nlohmann::ordered_json::array();
        for (const auto& p : rec.pose3d->joints) j3.push_back({p.x, p.y, p.z});
    }
    j["root"] = rec.pose2d.root ? static_cast<long long>(*rec.pose2d.root) : -1LL;
    return j.dump();
}

namespace {

double coordinate(const nlohmann::json& v) {
    if (!v.is_number()) throw InvalidArgument("joint coordinates must be numbers");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw InvalidArgument("joint coordinates must be finite");
    return d;
}

} // namespace

PoseRecord pose_record_from_json(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("pose record does not parse: ") + e.what());
    }
    if (!j.is_object() || !j.contains("joints2d") || !j["joints2d"].is_array())
        throw InvalidArgument("pose record needs a 'joints2d' array");
    if (!j.contains("root") || !j["root"].is_number_integer())
        throw InvalidArgument("pose record needs an integer 'root'");

    PoseRecord rec;
    for (const auto& p : j["joints2d"]) {
        if (!p.is_array() || p.size() != 2) throw InvalidArgument("joints2d entries must be [u,v]");
        rec.pose2d.joints.push_back({coordinate(p[0]), coordinate(p[1])});
    }
    const long long root = j["root"].get<long long>();
    if (root < -1 || root >= static_cast<long long>(rec.pose2d.joints.size()))
        throw InvalidArgument("pose record root " + std::to_string(root) + " out of range");
    if (root >= 0) rec.pose2d.root = static_cast<std::size_t>(root);

    if (j.contains("joints3d")) {
        if (!j["joints3d"].is_array()) throw InvalidArgument("'joints3d' must be an array");
        Pose3D p3{{}, rec.pose2d.root};
        for (const auto& p : j["joints3d"]) {
            if (!p.is_array() || p.size() != 3)
                throw InvalidArgument("joints3d entries must be [x,y,z]");
            p3.joints.push_back({coordinate(p[0]), coordinate(p[1]), coordinate(p[2])});
        }
        if (p3.joints.size() != rec.pose2d.joints.size())
            throw InvalidArgument("joints2d and joints3d differ in length");
        rec.pose3d = std::move(p3);
    }
    return rec;
}

std::string write_pose_jsonl(const std::vector<PoseRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += pose_record_to_json(r);
        out += '\n';
    }
    return out;
}

std::vector<PoseRecord> parse_pose_jsonl(const std::string& text) {
    std::vector<PoseRecord> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(pose_record_from_json(line));
        } catch (const InvalidArgument& e) {
            throw InvalidArgument("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::vector<PoseRecord> read_pose_jsonl(const std::filesystem::path& path) {
    try {
        return parse_pose_jsonl(read_text_file(path));
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(path.string() + ": " + e.what());
    }
}

} // namespace perspcrop
