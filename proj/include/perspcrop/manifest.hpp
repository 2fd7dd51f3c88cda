#pragma once

// Run manifest: what produced a set of output files and their content hashes.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace perspcrop {

inline constexpr const char* kVersion = "0.1.0";

struct ManifestOutput {
    std::string path;
    std::uint64_t bytes = 0;
    std::string fnv1a64;   ///< hex digest of the file contents
};

struct RunManifest {
    std::string command;
    std::vector<std::string> argv;   ///< arguments after the program name
    nlohmann::ordered_json config;   ///< resolved settings of the run
    std::string config_hash;         ///< fnv1a64 of config.dump()
    std::uint64_t seed = 0;
    std::string version = kVersion;
    std::string started;             ///< UTC, ISO 8601
    std::string finished;
    std::vector<ManifestOutput> outputs;

    /// Hashes the file as it is on disk now.
    void add_output(const std::filesystem::path& path);
    nlohmann::ordered_json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
    /// Atomic write.
    void write(const std::filesystem::path& path) const;
    static RunManifest read(const std::filesystem::path& path);
};

std::string utc_timestamp();

} // namespace perspcrop
