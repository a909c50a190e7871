#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace orca {

/// Lower-case hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

/// Throws orca::Error when the file cannot be read.
std::string read_file(const std::filesystem::path& path);

/// Collapses runs of whitespace into single spaces and trims both ends.
std::string collapse_whitespace(std::string_view text);

/// Round half away from zero to `digits` decimals, tolerant of binary representation error
/// (6.445 rounds to 6.45).
double round_half_up(double value, int digits);

/// Fixed-point text with exactly `digits` decimals after half-up rounding.
std::string format_fixed(double value, int digits);

/// Shortest text that parses back to exactly `value`.
std::string format_shortest(double value);

}  // namespace orca
