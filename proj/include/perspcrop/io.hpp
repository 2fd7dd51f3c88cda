#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace perspcrop {

/// Throws InvalidArgument naming the path when the file cannot be read.
std::string read_text_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// FNV-1a, 64 bit. Stable across platforms; used for config hashes.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

} // namespace perspcrop
