#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ibias::text {

/// Decodes UTF-8 into Unicode scalar values. Throws FormatError on invalid input.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

/// Number of Unicode scalar values in a UTF-8 string.
std::size_t scalar_length(std::string_view s);

bool is_unicode_space(char32_t c);
bool is_punctuation(char32_t c);

/// True when the string is empty or consists solely of Unicode whitespace.
bool is_blank(std::string_view s);

/// Whitespace split with leading and trailing punctuation stripped from each
/// piece; pieces that are pure punctuation are dropped.
std::vector<std::string> word_tokens(std::string_view s);

/// ASCII lowercase; other code points are left unchanged.
std::string ascii_lower(std::string_view s);

}  // namespace ibias::text
