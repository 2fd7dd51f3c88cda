#include "perspcrop/manifest.hpp"

#include <chrono>
#include <ctime>

#include "perspcrop/errors.hpp"
#include "perspcrop/io.hpp"

namespace perspcrop {

std::string utc_timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void RunManifest::add_output(const std::filesystem::path& path) {
    const std::string data = read_text_file(path);
    outputs.push_back({path.string(), data.size(), hex64(fnv1a64(data))});
}

nlohmann::ordered_json RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["argv"] = argv;
    j["config"] = config;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["version"] = version;
    j["started"] = started;
    j["finished"] = finished;
    j["outputs"] = nlohmann::ordered_json::array();
    for (const auto& o : outputs)
        j["outputs"].push_back({{"path", o.path}, {"bytes", o.bytes}, {"fnv1a64", o.fnv1a64}});
    return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
    RunManifest m;
    try {
        m.command = j.at("command").get<std::string>();
        m.argv = j.at("argv").get<std::vector<std::string>>();
        m.config = j.at("config");
        m.config_hash = j.at("config_hash").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.version = j.at("version").get<std::string>();
        m.started = j.at("started").get<std::string>();
        m.finished = j.at("finished").get<std::string>();
        for (const auto& o : j.at("outputs"))
            m.outputs.push_back({o.at("path").get<std::string>(), o.at("bytes").get<std::uint64_t>(),
                                 o.at("fnv1a64").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed manifest: ") + e.what());
    }
    return m;
}

void RunManifest::write(const std::filesystem::path& path) const {
    write_file_atomic(path, to_json().dump(2) + "\n");
}

RunManifest RunManifest::read(const std::filesystem::path& path) {
    try {
        return from_json(nlohmann::json::parse(read_text_file(path)));
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidArgument(path.string() + ": " + e.what());
    }
}

} // namespace perspcrop
