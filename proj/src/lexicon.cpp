#include "emodist/lexicon.hpp"

#include <array>

#include "emodist/error.hpp"
#include "emodist/io.hpp"
#include "emodist/text.hpp"

namespace emodist {
namespace {

constexpr std::array<std::string_view, kLexiconCategories> kNames = {
    "anger", "anticipation", "disgust", "fear", "joy", "sadness", "surprise", "trust", "negative", "positive"};

}  // namespace

std::string_view to_string(LexiconCategory c) noexcept { return kNames[static_cast<std::size_t>(c)]; }

std::optional<LexiconCategory> parse_lexicon_category(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<LexiconCategory>(i);
  }
  return std::nullopt;
}

Lexicon Lexicon::parse(std::string_view tsv) {
  Lexicon lex;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < tsv.size()) {
    auto end = tsv.find('\n', pos);
    if (end == std::string_view::npos) end = tsv.size();
    std::string_view line = trim(tsv.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;

    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string_view::npos ? tab1 : line.find('\t', tab1 + 1);
    if (tab2 == std::string_view::npos) throw RecordError(line_no, "expected word<TAB>category<TAB>0|1");
    const auto word = trim(line.substr(0, tab1));
    const auto cat_name = trim(line.substr(tab1 + 1, tab2 - tab1 - 1));
    const auto value = trim(line.substr(tab2 + 1));
    const auto category = parse_lexicon_category(cat_name);
    if (!category) throw RecordError(line_no, "unknown lexicon category '" + std::string(cat_name) + "'");
    if (value != "0" && value != "1") throw RecordError(line_no, "flag must be 0 or 1");
    if (word.empty()) throw RecordError(line_no, "empty word");
    if (value == "1") lex.set(word, *category);
  }
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) { return parse(read_file(path)); }

void Lexicon::set(std::string_view word, LexiconCategory category, bool value) {
  const std::string key = to_lower(word);
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    if (!value) return;
    it = entries_.emplace(key, LexiconFlags{}).first;
  }
  it->second.set(static_cast<std::size_t>(category), value);
  if (it->second.none()) entries_.erase(it);
}

LexiconFlags Lexicon::lookup(std::string_view word) const {
  const auto it = entries_.find(to_lower(word));
  return it == entries_.end() ? LexiconFlags{} : it->second;
}

}  // namespace emodist
