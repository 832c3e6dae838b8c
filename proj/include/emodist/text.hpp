#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace emodist {

/// Strips ASCII whitespace from both ends.
std::string_view trim(std::string_view s) noexcept;

/// Decodes UTF-8 into code points; invalid bytes become U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

/// Letter or digit, ASCII or not. Non-ASCII code points count as word
/// characters unless they fall in a known punctuation/symbol block.
bool is_word_char(char32_t c) noexcept;
bool is_space(char32_t c) noexcept;
bool is_punct(char32_t c) noexcept;
bool is_upper(char32_t c) noexcept;
bool is_lower(char32_t c) noexcept;
char32_t to_lower(char32_t c) noexcept;

std::string to_lower(std::string_view s);

/// Splits on non-word boundaries. An apostrophe (' or U+2019) between two
/// word characters stays inside the token ("don't"); U+2019 is normalized to '.
std::vector<std::string> tokenize(std::string_view text, bool lowercase = true);

/// Collapses whitespace runs into one space and trims; optionally lowercases.
std::string normalize_whitespace(std::string_view text, bool lowercase = true);

/// All contiguous character n-grams for n in [low, high], counted in code
/// points over the whitespace-normalized text. Shorter input yields nothing.
std::vector<std::string> char_ngrams(std::string_view text, std::size_t low, std::size_t high,
                                     bool lowercase = true);

/// All contiguous token n-grams for n in [low, high], tokens joined by a
/// single space.
std::vector<std::string> word_ngrams(std::span<const std::string> tokens, std::size_t low, std::size_t high);

/// Number of code points.
std::size_t utf8_length(std::string_view s);

}  // namespace emodist
