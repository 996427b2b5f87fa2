#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sboost {

/// Shortest round-trippable-enough text for a real (10 significant digits);
/// "NA" for NaN, "inf"/"-inf" for infinities.
std::string format_real(double v);

std::vector<std::string> split_tabs(std::string_view line);

/// Splits on runs of spaces or tabs.
std::vector<std::string> split_ws(std::string_view line);

std::string_view trim(std::string_view s);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

/// 64-bit FNV-1a checksum, printed as 16 hex digits.
std::string checksum_hex(std::string_view contents);

} // namespace sboost
