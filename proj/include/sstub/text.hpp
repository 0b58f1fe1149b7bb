#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sstub {

/// Splits on '\n'; a trailing newline does not produce an empty last element.
std::vector<std::string_view> split_lines(std::string_view text);

std::string to_lower(std::string_view text);
std::string_view trim(std::string_view text);

/// Collapses every run of whitespace into a single space and trims both ends.
std::string collapse_whitespace(std::string_view text);

/// Decodes a git C-style quoted string ("a\tb\303\251"). Input without a
/// leading quote is returned unchanged. Throws ParseError(0) on bad escapes.
std::string unquote_c_style(std::string_view text);

bool starts_with(std::string_view text, std::string_view prefix);

} // namespace sstub
