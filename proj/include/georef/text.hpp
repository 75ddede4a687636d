#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace georef::text {

/// Lowercases ASCII and the Latin-1 supplement capitals (U+00C0..U+00DE).
/// Byte length is preserved, so offsets into the folded string are valid
/// offsets into the original.
std::string case_fold(std::string_view s);

/// Trims and collapses runs of ASCII whitespace to a single space.
std::string collapse_whitespace(std::string_view s);

std::string_view trim(std::string_view s);

/// Number of Unicode scalar values (UTF-8 lead bytes).
std::size_t scalar_count(std::string_view utf8);

bool is_word_byte(unsigned char c);

std::vector<std::string> split(std::string_view s, char delim);

/// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

/// Fixed-point decimal rendering, e.g. format_fixed(3.14159, 2) == "3.14".
std::string format_fixed(double value, int decimals);

}  // namespace georef::text
