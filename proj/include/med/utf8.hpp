#pragma once

#include <string>
#include <string_view>

namespace med::utf8 {

// Decodes UTF-8 into a sequence of Unicode scalar values.
// Throws std::invalid_argument on malformed input (bad continuation bytes,
// overlong forms, surrogates, values past U+10FFFF).
std::u32string decode(std::string_view s);

std::string encode(std::u32string_view s);
std::string encode(char32_t c);

// Number of codepoints in a UTF-8 string.
std::size_t length(std::string_view s);

}  // namespace med::utf8
