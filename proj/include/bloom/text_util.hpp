#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bloom {

std::string_view trim(std::string_view s);
std::string ascii_lower(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

/// Byte offset of the first ill-formed UTF-8 sequence, if any.
std::optional<std::size_t> first_invalid_utf8(std::string_view s);

/// Whole-file helpers; both throw IoError.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

/// FNV-1a, 64-bit.
std::uint64_t fnv1a64(std::string_view data);

/// Shortest round-trip decimal form of a double, and its inverse.
std::string format_double(double v);
double parse_double(std::string_view s);

}  // namespace bloom
