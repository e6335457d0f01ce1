#ifndef MBRKIT_SRC_TEXT_HPP_
#define MBRKIT_SRC_TEXT_HPP_

#include <string_view>
#include <vector>

namespace mbrkit::text {

bool is_space(char32_t c);

// Decodes UTF-8 into code points. Each byte of an invalid sequence decodes
// to U+FFFD.
std::vector<char32_t> decode_utf8(std::string_view s);

// Splits on runs of Unicode whitespace. Views point into `s`.
std::vector<std::string_view> split_whitespace(std::string_view s);

// Code points of `s` with all Unicode whitespace removed.
std::vector<char32_t> non_space_chars(std::string_view s);

}  // namespace mbrkit::text

#endif  // MBRKIT_SRC_TEXT_HPP_
