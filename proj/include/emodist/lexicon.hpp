#pragma once

#include <bitset>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace emodist {

/// NRC-style lexicon categories: eight emotions followed by two valence flags.
enum class LexiconCategory : std::size_t {
  anger = 0,
  anticipation,
  disgust,
  fear,
  joy,
  sadness,
  surprise,
  trust,
  negative,
  positive,
};

inline constexpr std::size_t kLexiconCategories = 10;
inline constexpr std::size_t kLexiconEmotions = 8;

using LexiconFlags = std::bitset<kLexiconCategories>;

std::string_view to_string(LexiconCategory c) noexcept;
std::optional<LexiconCategory> parse_lexicon_category(std::string_view name) noexcept;

/// Word -> category flags. Only words with at least one flag are stored.
class Lexicon {
 public:
  /// Parses `word<TAB>category<TAB>0|1` lines. Words are lowercased.
  /// Throws RecordError (1-based line) for malformed lines or unknown
  /// categories.
  static Lexicon parse(std::string_view tsv);
  static Lexicon load(const std::filesystem::path& path);

  void set(std::string_view word, LexiconCategory category, bool value = true);

  /// Flags of a word; all-false for words not in the lexicon.
  LexiconFlags lookup(std::string_view word) const;

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  /// Entries in lexicographic word order.
  const std::map<std::string, LexiconFlags, std::less<>>& entries() const noexcept { return entries_; }

 private:
  std::map<std::string, LexiconFlags, std::less<>> entries_;
};

}  // namespace emodist
