#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

namespace mpconv::io {

/// Shortest round-trip-safe decimal ("%.17g"), locale independent.
std::string format_double(double v);

/// Writes `contents` to `path`, creating parent directories.
/// Throws std::runtime_error naming the path on failure.
void write_text(const std::filesystem::path& path, const std::string& contents);

std::string read_text(const std::filesystem::path& path);

nlohmann::json read_json(const std::filesystem::path& path);

/// Pretty JSON with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace mpconv::io
