#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace netlens {

/// FNV-1a 64-bit. Cache keys and input fingerprints; a collision is treated
/// as a match, which is acceptable at the corpus sizes involved.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

std::string to_lower(std::string_view s);
std::vector<std::string> split_csv_line(const std::string& line);
std::string csv_escape(const std::string& field);

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, std::string_view content);

}  // namespace netlens
