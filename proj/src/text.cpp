#include "emodist/text.hpp"

#include <algorithm>

namespace emodist {
namespace {

constexpr char32_t kReplacement = 0xFFFD;
constexpr char32_t kRightQuote = 0x2019;

bool in(char32_t c, char32_t lo, char32_t hi) noexcept { return c >= lo && c <= hi; }

bool is_ascii_alnum(char32_t c) noexcept { return in(c, '0', '9') || in(c, 'a', 'z') || in(c, 'A', 'Z'); }

// Blocks treated as punctuation or symbols rather than word characters.
bool is_symbol_block(char32_t c) noexcept {
  return in(c, 0x80, 0xBF) || c == 0xD7 || c == 0xF7 || in(c, 0x2000, 0x206F) || in(c, 0x20A0, 0x20CF) ||
         in(c, 0x2100, 0x2BFF) || in(c, 0x3000, 0x303F) || in(c, 0xFE30, 0xFE4F) || in(c, 0xFF00, 0xFF0F) ||
         in(c, 0xFF1A, 0xFF20) || in(c, 0xFF3B, 0xFF40) || in(c, 0xFF5B, 0xFF65) || in(c, 0x1F000, 0x1FAFF) ||
         in(c, 0xFE00, 0xFE0F) || c == kReplacement;
}

void append_utf8(std::string& out, char32_t c) {
  if (c < 0x80) {
    out += static_cast<char>(c);
  } else if (c < 0x800) {
    out += static_cast<char>(0xC0 | (c >> 6));
    out += static_cast<char>(0x80 | (c & 0x3F));
  } else if (c < 0x10000) {
    out += static_cast<char>(0xE0 | (c >> 12));
    out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (c & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (c >> 18));
    out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (c & 0x3F));
  }
}

}  // namespace

std::string_view trim(std::string_view s) noexcept {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    char32_t c = 0;
    if (b0 < 0x80) {
      len = 1;
      c = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      c = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      c = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      c = b0 & 0x07;
    }
    bool ok = len > 0 && i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
      } else {
        c = (c << 6) | (b & 0x3F);
      }
    }
    if (ok && ((len == 2 && c < 0x80) || (len == 3 && c < 0x800) || (len == 4 && (c < 0x10000 || c > 0x10FFFF)) ||
               in(c, 0xD800, 0xDFFF))) {
      ok = false;
    }
    if (ok) {
      out += c;
      i += len;
    } else {
      out += kReplacement;
      ++i;
    }
  }
  return out;
}

std::string encode_utf8(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t c : s) append_utf8(out, c);
  return out;
}

bool is_space(char32_t c) noexcept {
  return c == ' ' || in(c, 0x09, 0x0D) || c == 0x85 || c == 0xA0 || c == 0x1680 || in(c, 0x2000, 0x200A) ||
         c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F || c == 0x3000;
}

bool is_word_char(char32_t c) noexcept {
  if (c < 0x80) return is_ascii_alnum(c);
  return !is_space(c) && !is_symbol_block(c);
}

bool is_punct(char32_t c) noexcept {
  if (c < 0x80) return c > 0x20 && c < 0x7F && !is_ascii_alnum(c);
  return !is_space(c) && (in(c, 0xA1, 0xBF) || in(c, 0x2010, 0x2027) || in(c, 0x2030, 0x205E) ||
                          in(c, 0x3001, 0x3003) || in(c, 0x3008, 0x3011) || in(c, 0xFF01, 0xFF0F));
}

bool is_upper(char32_t c) noexcept { return to_lower(c) != c; }

bool is_lower(char32_t c) noexcept {
  if (c < 0x80) return in(c, 'a', 'z');
  if (c == 0xDF || c == 0xFF) return true;
  if (to_lower(c) != c) return false;
  for (char32_t partner : {c - 1, c + 1, c - 32, c - 80}) {
    if (partner != c && to_lower(partner) == c) return true;
  }
  return false;
}

char32_t to_lower(char32_t c) noexcept {
  if (in(c, 'A', 'Z')) return c + 32;
  if (c < 0x80) return c;
  if (in(c, 0xC0, 0xDE) && c != 0xD7) return c + 32;
  if (in(c, 0x100, 0x137) || in(c, 0x14A, 0x177)) return (c & 1) ? c : c + 1;
  if (in(c, 0x139, 0x148) || in(c, 0x179, 0x17E)) return (c & 1) ? c + 1 : c;
  if (c == 0x178) return 0xFF;
  if (in(c, 0x391, 0x3A9) && c != 0x3A2) return c + 32;
  if (in(c, 0x410, 0x42F)) return c + 32;
  if (in(c, 0x400, 0x40F)) return c + 80;
  return c;
}

std::string to_lower(std::string_view s) {
  std::u32string cps = decode_utf8(s);
  for (auto& c : cps) c = to_lower(c);
  return encode_utf8(cps);
}

std::vector<std::string> tokenize(std::string_view text, bool lowercase) {
  const std::u32string cps = decode_utf8(text);
  std::vector<std::string> tokens;
  std::string current;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    char32_t c = cps[i];
    if (is_word_char(c)) {
      append_utf8(current, lowercase ? to_lower(c) : c);
    } else if ((c == '\'' || c == kRightQuote) && !current.empty() && i + 1 < cps.size() &&
               is_word_char(cps[i + 1])) {
      current += '\'';
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string normalize_whitespace(std::string_view text, bool lowercase) {
  const std::u32string cps = decode_utf8(text);
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char32_t c : cps) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    append_utf8(out, lowercase ? to_lower(c) : c);
  }
  return out;
}

std::vector<std::string> char_ngrams(std::string_view text, std::size_t low, std::size_t high, bool lowercase) {
  std::vector<std::string> grams;
  if (low == 0 || low > high) return grams;
  const std::u32string cps = decode_utf8(normalize_whitespace(text, lowercase));
  for (std::size_t n = low; n <= high && n <= cps.size(); ++n) {
    for (std::size_t i = 0; i + n <= cps.size(); ++i) {
      grams.push_back(encode_utf8(std::u32string_view(cps).substr(i, n)));
    }
  }
  return grams;
}

std::vector<std::string> word_ngrams(std::span<const std::string> tokens, std::size_t low, std::size_t high) {
  std::vector<std::string> grams;
  if (low == 0 || low > high) return grams;
  for (std::size_t n = low; n <= high && n <= tokens.size(); ++n) {
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string gram = tokens[i];
      for (std::size_t k = 1; k < n; ++k) {
        gram += ' ';
        gram += tokens[i + k];
      }
      grams.push_back(std::move(gram));
    }
  }
  return grams;
}

std::size_t utf8_length(std::string_view s) { return decode_utf8(s).size(); }

}  // namespace emodist
