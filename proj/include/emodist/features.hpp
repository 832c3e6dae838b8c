#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <nlohmann/json.hpp>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "emodist/embeddings.hpp"
#include "emodist/lexicon.hpp"
#include "emodist/sparse.hpp"

namespace emodist {

struct NgramRange {
  std::size_t low = 1;
  std::size_t high = 1;
  bool operator==(const NgramRange&) const = default;
};

enum class TfScheme { raw, sublinear };
enum class EmbeddingPooling { mean, tfidf_mean };

/// Which feature families are produced and how.
struct FeatureConfig {
  bool tfidf = true;
  bool word_ngrams = true;
  bool char_ngrams = true;
  bool negation = true;
  bool punctuation = true;
  bool lexicon = false;
  bool embeddings = false;
  NgramRange word_range{2, 3};
  NgramRange char_range{2, 5};
  std::size_t min_freq = 1;
  bool lowercase = true;
  TfScheme tf = TfScheme::raw;
  EmbeddingPooling pooling = EmbeddingPooling::mean;

  /// Throws ConfigError for inverted or zero n-gram ranges, min_freq == 0,
  /// or when every family is disabled.
  void validate() const;

  static FeatureConfig tfidf_only();

  bool operator==(const FeatureConfig&) const = default;
};

nlohmann::json to_json(const FeatureConfig& cfg);
/// Rejects unknown keys; missing keys keep their defaults.
FeatureConfig feature_config_from_json(const nlohmann::json& j);

enum class Family { tfidf, word_ngrams, char_ngrams, negation, punctuation, lexicon, embeddings };

std::string_view to_string(Family f) noexcept;

/// A family's slice of the combined feature space.
struct Block {
  Family family;
  std::size_t offset = 0;
  std::size_t dim = 0;
};

inline constexpr std::size_t kNegationDim = 2;     // hits, presence
inline constexpr std::size_t kPunctuationDim = 6;  // '!', '?', any, all-caps tokens, has '!', has '?'
inline constexpr std::size_t kLexiconDim = kLexiconCategories;

const std::vector<std::string>& default_negations();
const std::vector<std::string>& default_stopwords();

/// One word per line; blank lines and lines starting with '#' are skipped.
std::vector<std::string> load_word_list(const std::filesystem::path& path);

/// Sorted terms with document frequencies; index i is the i-th term.
class TermVocabulary {
 public:
  TermVocabulary() = default;
  TermVocabulary(std::vector<std::string> terms, std::vector<std::uint32_t> df);

  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }
  const std::vector<std::string>& terms() const noexcept { return terms_; }
  const std::vector<std::uint32_t>& df() const noexcept { return df_; }
  std::optional<std::size_t> index_of(const std::string& term) const;

  bool operator==(const TermVocabulary& o) const { return terms_ == o.terms_ && df_ == o.df_; }

 private:
  std::vector<std::string> terms_;
  std::vector<std::uint32_t> df_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct FitOptions {
  /// Throw instead of returning a vectorizer whose enabled vocabularies are
  /// all empty.
  bool strict = false;
  std::vector<std::string> negations = default_negations();
  std::vector<std::string> stopwords = default_stopwords();
};

/// Fitted vocabulary/document-frequency state. Immutable after fit().
class Vectorizer {
 public:
  /// Throws DataError for an empty document list (and, in strict mode, for
  /// empty vocabularies) and ConfigError for an invalid config.
  static Vectorizer fit(std::span<const std::string> texts, const FeatureConfig& cfg, const FitOptions& opts = {});

  const FeatureConfig& config() const noexcept { return config_; }
  std::size_t n_docs() const noexcept { return n_docs_; }
  const TermVocabulary& unigrams() const noexcept { return unigrams_; }
  const TermVocabulary& word_ngram_vocab() const noexcept { return word_ngrams_; }
  const TermVocabulary& char_ngram_vocab() const noexcept { return char_ngrams_; }
  const std::set<std::string>& negations() const noexcept { return negations_; }
  const std::set<std::string>& stopwords() const noexcept { return stopwords_; }

  /// Smoothed idf: ln((1 + n) / (1 + df)) + 1.
  double idf(std::uint32_t df) const noexcept;

  std::vector<std::string> tokens(std::string_view text) const;

  /// L2-normalized tf-idf over unigrams; out-of-vocabulary tokens ignored.
  SparseVector tfidf(std::string_view text) const;
  /// Same weighting over word / character n-grams.
  SparseVector word_ngram_features(std::string_view text) const;
  SparseVector char_ngram_features(std::string_view text) const;

  nlohmann::json to_json() const;
  static Vectorizer from_json(const nlohmann::json& j);

  bool operator==(const Vectorizer& o) const {
    return config_ == o.config_ && n_docs_ == o.n_docs_ && unigrams_ == o.unigrams_ &&
           word_ngrams_ == o.word_ngrams_ && char_ngrams_ == o.char_ngrams_ && negations_ == o.negations_ &&
           stopwords_ == o.stopwords_;
  }

 private:
  SparseVector weigh(const TermVocabulary& vocab, std::span<const std::string> terms) const;

  FeatureConfig config_;
  std::size_t n_docs_ = 0;
  TermVocabulary unigrams_;
  TermVocabulary word_ngrams_;
  TermVocabulary char_ngrams_;
  std::set<std::string> negations_;
  std::set<std::string> stopwords_;
};

inline SparseVector tfidf_transform(const Vectorizer& v, std::string_view text) { return v.tfidf(text); }

/// Negation hit count and presence.
SparseVector negation_features(std::string_view text, const std::set<std::string>& negations);
/// '!' count, '?' count, punctuation count, all-caps token count, and
/// presence flags for '!' and '?'.
SparseVector punctuation_features(std::string_view text);
/// Negation block followed by punctuation block.
SparseVector surface_features(std::string_view text, const std::set<std::string>& negations);
SparseVector surface_features(std::string_view text);

/// Per-category flag sums over tokens that are not stopwords.
SparseVector lexicon_features(const Lexicon& lexicon, std::string_view text, const std::set<std::string>& stopwords);

/// Mean vector of in-table tokens (exact form first, then lowercased); the
/// zero vector when none is found. With `idf` the mean is weighted per token.
SparseVector embed_sentence(const EmbeddingTable& table, std::string_view text, const Vectorizer* idf = nullptr);

/// Vectorizer plus optional shared resources, producing the combined
/// feature vector. Safe to share across threads.
class FeatureExtractor {
 public:
  /// Throws ConfigError when the config enables lexicon or embedding
  /// features without the corresponding resource.
  FeatureExtractor(Vectorizer vectorizer, std::shared_ptr<const Lexicon> lexicon = nullptr,
                   std::shared_ptr<const EmbeddingTable> embeddings = nullptr);

  const Vectorizer& vectorizer() const noexcept { return vectorizer_; }
  const std::shared_ptr<const Lexicon>& lexicon() const noexcept { return lexicon_; }
  const std::shared_ptr<const EmbeddingTable>& embeddings() const noexcept { return embeddings_; }
  const std::vector<Block>& layout() const noexcept { return layout_; }
  std::size_t dim() const noexcept { return dim_; }

  SparseVector transform(std::string_view text) const;
  std::vector<SparseVector> transform_all(std::span<const std::string> texts) const;

 private:
  Vectorizer vectorizer_;
  std::shared_ptr<const Lexicon> lexicon_;
  std::shared_ptr<const EmbeddingTable> embeddings_;
  std::vector<Block> layout_;
  std::size_t dim_ = 0;
};

}  // namespace emodist
