#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace psguard::detail {

using ojson = nlohmann::ordered_json;

/// Pretty-prints with two-space indentation. Scalar-only arrays stay on one
/// line. Floating-point values go through printf with `float_format`.
std::string dump_json(const ojson& value, const char* float_format);

/// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents,
                       const char* module);

std::string read_file(const std::filesystem::path& path, const char* module);

}  // namespace psguard::detail
