#include "emodist/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>
#include <unordered_set>

#include "emodist/error.hpp"
#include "emodist/io.hpp"
#include "emodist/text.hpp"

namespace emodist {
namespace {

using nlohmann::json;

constexpr int kVectorizerVersion = 1;

std::string_view to_string(TfScheme s) { return s == TfScheme::raw ? "raw" : "sublinear"; }
std::string_view to_string(EmbeddingPooling p) { return p == EmbeddingPooling::mean ? "mean" : "tfidf_mean"; }

json range_json(const NgramRange& r) { return json::array({r.low, r.high}); }

NgramRange range_from_json(const json& j, std::string_view key) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_unsigned() || !j[1].is_number_unsigned()) {
    throw ConfigError("features." + std::string(key) + " must be [low, high]");
  }
  return {j[0].get<std::size_t>(), j[1].get<std::size_t>()};
}

bool is_negation(const std::string& token, const std::set<std::string>& negations) {
  if (negations.contains(token)) return true;
  return token.size() > 3 && token.ends_with("n't") && negations.contains("n't");
}

struct TermCounts {
  std::map<std::string, std::pair<std::uint64_t, std::uint32_t>> stats;  // term -> (frequency, df)

  void add_document(std::span<const std::string> terms) {
    std::unordered_set<std::string_view> seen;
    for (const auto& t : terms) {
      auto& [freq, df] = stats[t];
      ++freq;
      if (seen.insert(t).second) ++df;
    }
  }

  TermVocabulary build(std::size_t min_freq) const {
    std::vector<std::string> terms;
    std::vector<std::uint32_t> df;
    for (const auto& [term, s] : stats) {
      if (s.first < min_freq) continue;
      terms.push_back(term);
      df.push_back(s.second);
    }
    return {std::move(terms), std::move(df)};
  }
};

json vocab_json(const TermVocabulary& v) {
  json arr = json::array();
  for (std::size_t i = 0; i < v.size(); ++i) arr.push_back(json::array({v.terms()[i], v.df()[i]}));
  return arr;
}

TermVocabulary vocab_from_json(const json& arr) {
  std::vector<std::string> terms;
  std::vector<std::uint32_t> df;
  for (const auto& e : arr) {
    terms.push_back(e.at(0).get<std::string>());
    df.push_back(e.at(1).get<std::uint32_t>());
  }
  if (!std::is_sorted(terms.begin(), terms.end()) ||
      std::adjacent_find(terms.begin(), terms.end()) != terms.end()) {
    throw DataError("vectorizer vocabulary is not sorted and unique");
  }
  return {std::move(terms), std::move(df)};
}

}  // namespace

// --- configuration -----------------------------------------------------------

void FeatureConfig::validate() const {
  auto check = [](const NgramRange& r, std::string_view name) {
    if (r.low < 1 || r.low > r.high) {
      throw ConfigError(std::string(name) + " n-gram range must satisfy 1 <= low <= high");
    }
  };
  check(word_range, "word");
  check(char_range, "char");
  if (min_freq == 0) throw ConfigError("min_freq must be >= 1");
  if (!(tfidf || word_ngrams || char_ngrams || negation || punctuation || lexicon || embeddings)) {
    throw ConfigError("at least one feature family must be enabled");
  }
}

FeatureConfig FeatureConfig::tfidf_only() {
  FeatureConfig cfg;
  cfg.word_ngrams = cfg.char_ngrams = cfg.negation = cfg.punctuation = false;
  return cfg;
}

json to_json(const FeatureConfig& cfg) {
  return json{{"tfidf", cfg.tfidf},
              {"word_ngrams", cfg.word_ngrams},
              {"char_ngrams", cfg.char_ngrams},
              {"negation", cfg.negation},
              {"punctuation", cfg.punctuation},
              {"lexicon", cfg.lexicon},
              {"embeddings", cfg.embeddings},
              {"word_range", range_json(cfg.word_range)},
              {"char_range", range_json(cfg.char_range)},
              {"min_freq", cfg.min_freq},
              {"lowercase", cfg.lowercase},
              {"tf", to_string(cfg.tf)},
              {"pooling", to_string(cfg.pooling)}};
}

FeatureConfig feature_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("features must be an object");
  FeatureConfig cfg;
  for (const auto& [key, value] : j.items()) {
    auto flag = [&](bool& out) {
      if (!value.is_boolean()) throw ConfigError("features." + key + " must be a boolean");
      out = value.get<bool>();
    };
    if (key == "tfidf") {
      flag(cfg.tfidf);
    } else if (key == "word_ngrams") {
      flag(cfg.word_ngrams);
    } else if (key == "char_ngrams") {
      flag(cfg.char_ngrams);
    } else if (key == "negation") {
      flag(cfg.negation);
    } else if (key == "punctuation") {
      flag(cfg.punctuation);
    } else if (key == "lexicon") {
      flag(cfg.lexicon);
    } else if (key == "embeddings") {
      flag(cfg.embeddings);
    } else if (key == "lowercase") {
      flag(cfg.lowercase);
    } else if (key == "word_range") {
      cfg.word_range = range_from_json(value, key);
    } else if (key == "char_range") {
      cfg.char_range = range_from_json(value, key);
    } else if (key == "min_freq") {
      if (!value.is_number_unsigned()) throw ConfigError("features.min_freq must be a positive integer");
      cfg.min_freq = value.get<std::size_t>();
    } else if (key == "tf") {
      const auto s = value.is_string() ? value.get<std::string>() : "";
      if (s == "raw") {
        cfg.tf = TfScheme::raw;
      } else if (s == "sublinear") {
        cfg.tf = TfScheme::sublinear;
      } else {
        throw ConfigError("features.tf must be \"raw\" or \"sublinear\"");
      }
    } else if (key == "pooling") {
      const auto s = value.is_string() ? value.get<std::string>() : "";
      if (s == "mean") {
        cfg.pooling = EmbeddingPooling::mean;
      } else if (s == "tfidf_mean") {
        cfg.pooling = EmbeddingPooling::tfidf_mean;
      } else {
        throw ConfigError("features.pooling must be \"mean\" or \"tfidf_mean\"");
      }
    } else {
      throw ConfigError("unknown key features." + key);
    }
  }
  cfg.validate();
  return cfg;
}

std::string_view to_string(Family f) noexcept {
  switch (f) {
    case Family::tfidf:
      return "tfidf";
    case Family::word_ngrams:
      return "word_ngrams";
    case Family::char_ngrams:
      return "char_ngrams";
    case Family::negation:
      return "negation";
    case Family::punctuation:
      return "punctuation";
    case Family::lexicon:
      return "lexicon";
    case Family::embeddings:
      return "embeddings";
  }
  return "?";
}

// --- word lists ----------------------------------------------------------------

const std::vector<std::string>& default_negations() {
  static const std::vector<std::string> words = {"not",  "no",      "never", "n't",     "none",
                                                 "nobody", "nothing", "neither", "nor", "cannot"};
  return words;
}

const std::vector<std::string>& default_stopwords() {
  static const std::vector<std::string> words = {
      "a",       "about",  "above",   "after",   "again",   "against", "all",     "am",     "an",     "and",
      "any",     "are",    "as",      "at",      "be",      "because", "been",    "before", "being",  "below",
      "between", "both",   "but",     "by",      "can",     "could",   "did",     "do",     "does",   "doing",
      "down",    "during", "each",    "few",     "for",     "from",    "further", "had",    "has",    "have",
      "having",  "he",     "her",     "here",    "hers",    "herself", "him",     "himself", "his",   "how",
      "i",       "if",     "in",      "into",    "is",      "it",      "its",     "itself", "just",   "me",
      "more",    "most",   "my",      "myself",  "of",      "off",     "on",      "once",   "only",   "or",
      "other",   "our",    "ours",    "ourselves", "out",   "over",    "own",     "same",   "she",    "should",
      "so",      "some",   "such",    "than",    "that",    "the",     "their",   "theirs", "them",   "themselves",
      "then",    "there",  "these",   "they",    "this",    "those",   "through", "to",     "too",    "under",
      "until",   "up",     "very",    "was",     "we",      "were",    "what",    "when",   "where",  "which",
      "while",   "who",    "whom",    "why",     "will",    "with",    "would",   "you",    "your",   "yours",
      "yourself", "yourselves"};
  return words;
}

std::vector<std::string> load_word_list(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  std::vector<std::string> words;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string::npos) end = content.size();
    const auto line = trim(std::string_view(content).substr(pos, end - pos));
    pos = end + 1;
    if (line.empty() || line.front() == '#') continue;
    words.push_back(to_lower(line));
  }
  return words;
}

// --- vocabulary ------------------------------------------------------------------

TermVocabulary::TermVocabulary(std::vector<std::string> terms, std::vector<std::uint32_t> df)
    : terms_(std::move(terms)), df_(std::move(df)) {
  if (terms_.size() != df_.size()) throw std::invalid_argument("terms and df differ in length");
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) index_.emplace(terms_[i], static_cast<std::uint32_t>(i));
}

std::optional<std::size_t> TermVocabulary::index_of(const std::string& term) const {
  const auto it = index_.find(term);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

// --- vectorizer --------------------------------------------------------------------

Vectorizer Vectorizer::fit(std::span<const std::string> texts, const FeatureConfig& cfg, const FitOptions& opts) {
  cfg.validate();
  if (texts.empty()) throw DataError("cannot fit a vectorizer on an empty document list");

  Vectorizer v;
  v.config_ = cfg;
  v.n_docs_ = texts.size();
  v.negations_ = {opts.negations.begin(), opts.negations.end()};
  v.stopwords_ = {opts.stopwords.begin(), opts.stopwords.end()};

  TermCounts unigrams;
  TermCounts word_grams;
  TermCounts char_grams;
  for (const auto& text : texts) {
    const auto toks = tokenize(text, cfg.lowercase);
    unigrams.add_document(toks);
    if (cfg.word_ngrams) {
      word_grams.add_document(word_ngrams(toks, cfg.word_range.low, cfg.word_range.high));
    }
    if (cfg.char_ngrams) {
      char_grams.add_document(char_ngrams(text, cfg.char_range.low, cfg.char_range.high, cfg.lowercase));
    }
  }
  v.unigrams_ = unigrams.build(cfg.min_freq);
  v.word_ngrams_ = word_grams.build(cfg.min_freq);
  v.char_ngrams_ = char_grams.build(cfg.min_freq);

  if (opts.strict) {
    const bool any_term_family = cfg.tfidf || cfg.word_ngrams || cfg.char_ngrams;
    const bool all_empty = (!cfg.tfidf || v.unigrams_.empty()) && (!cfg.word_ngrams || v.word_ngrams_.empty()) &&
                           (!cfg.char_ngrams || v.char_ngrams_.empty());
    if (any_term_family && all_empty) throw DataError("fitted vocabulary is empty");
  }
  return v;
}

double Vectorizer::idf(std::uint32_t df) const noexcept {
  return std::log((1.0 + static_cast<double>(n_docs_)) / (1.0 + static_cast<double>(df))) + 1.0;
}

std::vector<std::string> Vectorizer::tokens(std::string_view text) const { return tokenize(text, config_.lowercase); }

SparseVector Vectorizer::weigh(const TermVocabulary& vocab, std::span<const std::string> terms) const {
  std::map<std::uint32_t, double> tf;
  for (const auto& t : terms) {
    if (const auto i = vocab.index_of(t)) tf[static_cast<std::uint32_t>(*i)] += 1.0;
  }
  std::vector<SparseVector::Entry> entries;
  entries.reserve(tf.size());
  double norm2 = 0.0;
  for (const auto& [index, count] : tf) {
    const double weight = (config_.tf == TfScheme::sublinear ? 1.0 + std::log(count) : count) * idf(vocab.df()[index]);
    entries.emplace_back(index, weight);
    norm2 += weight * weight;
  }
  if (norm2 > 0.0) {
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& e : entries) e.second *= inv;
  }
  return SparseVector::from_pairs(vocab.size(), std::move(entries));
}

SparseVector Vectorizer::tfidf(std::string_view text) const { return weigh(unigrams_, tokens(text)); }

SparseVector Vectorizer::word_ngram_features(std::string_view text) const {
  const auto toks = tokens(text);
  return weigh(word_ngrams_, word_ngrams(toks, config_.word_range.low, config_.word_range.high));
}

SparseVector Vectorizer::char_ngram_features(std::string_view text) const {
  return weigh(char_ngrams_, char_ngrams(text, config_.char_range.low, config_.char_range.high, config_.lowercase));
}

json Vectorizer::to_json() const {
  return json{{"format", "emodist.vectorizer"},
              {"version", kVectorizerVersion},
              {"config", emodist::to_json(config_)},
              {"n_docs", n_docs_},
              {"negations", negations_},
              {"stopwords", stopwords_},
              {"vocabulary",
               {{"unigram", vocab_json(unigrams_)},
                {"word_ngram", vocab_json(word_ngrams_)},
                {"char_ngram", vocab_json(char_ngrams_)}}}};
}

Vectorizer Vectorizer::from_json(const json& j) {
  try {
    if (j.at("format") != "emodist.vectorizer") throw DataError("not a vectorizer file");
    if (j.at("version") != kVectorizerVersion) throw DataError("unsupported vectorizer version");
    Vectorizer v;
    v.config_ = feature_config_from_json(j.at("config"));
    v.n_docs_ = j.at("n_docs").get<std::size_t>();
    v.negations_ = j.at("negations").get<std::set<std::string>>();
    v.stopwords_ = j.at("stopwords").get<std::set<std::string>>();
    const auto& vocab = j.at("vocabulary");
    v.unigrams_ = vocab_from_json(vocab.at("unigram"));
    v.word_ngrams_ = vocab_from_json(vocab.at("word_ngram"));
    v.char_ngrams_ = vocab_from_json(vocab.at("char_ngram"));
    if (v.n_docs_ == 0) throw DataError("vectorizer fitted on zero documents");
    for (const auto* vocab_ptr : {&v.unigrams_, &v.word_ngrams_, &v.char_ngrams_}) {
      for (auto df : vocab_ptr->df()) {
        if (df < 1 || df > v.n_docs_) throw DataError("document frequency outside [1, n_docs]");
      }
    }
    return v;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed vectorizer: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("malformed vectorizer config: ") + e.what());
  }
}

// --- dense cue blocks ----------------------------------------------------------

SparseVector negation_features(std::string_view text, const std::set<std::string>& negations) {
  double hits = 0.0;
  for (const auto& t : tokenize(text, true)) {
    if (is_negation(t, negations)) hits += 1.0;
  }
  const std::vector<double> block = {hits, hits > 0.0 ? 1.0 : 0.0};
  return SparseVector::from_dense(block);
}

SparseVector punctuation_features(std::string_view text) {
  double exclaim = 0.0;
  double question = 0.0;
  double punct = 0.0;
  for (char32_t c : decode_utf8(text)) {
    if (c == '!') exclaim += 1.0;
    if (c == '?') question += 1.0;
    if (is_punct(c)) punct += 1.0;
  }
  double caps = 0.0;
  for (const auto& t : tokenize(text, false)) {
    std::size_t upper = 0;
    bool lower = false;
    for (char32_t c : decode_utf8(t)) {
      if (is_upper(c)) ++upper;
      if (is_lower(c)) lower = true;
    }
    if (upper >= 2 && !lower) caps += 1.0;
  }
  const std::vector<double> block = {exclaim, question, punct, caps, exclaim > 0.0 ? 1.0 : 0.0,
                                     question > 0.0 ? 1.0 : 0.0};
  return SparseVector::from_dense(block);
}

SparseVector surface_features(std::string_view text, const std::set<std::string>& negations) {
  const SparseVector blocks[] = {negation_features(text, negations), punctuation_features(text)};
  return combine(blocks);
}

SparseVector surface_features(std::string_view text) {
  static const std::set<std::string> negations(default_negations().begin(), default_negations().end());
  return surface_features(text, negations);
}

SparseVector lexicon_features(const Lexicon& lexicon, std::string_view text, const std::set<std::string>& stopwords) {
  std::vector<double> sums(kLexiconDim, 0.0);
  for (const auto& t : tokenize(text, true)) {
    if (stopwords.contains(t)) continue;
    const auto flags = lexicon.lookup(t);
    for (std::size_t c = 0; c < kLexiconDim; ++c) {
      if (flags.test(c)) sums[c] += 1.0;
    }
  }
  return SparseVector::from_dense(sums);
}

SparseVector embed_sentence(const EmbeddingTable& table, std::string_view text, const Vectorizer* idf) {
  std::vector<double> sum(table.dim(), 0.0);
  double total_weight = 0.0;
  for (const auto& t : tokenize(text, false)) {
    auto vec = table.find(t);
    const std::string lower = to_lower(t);
    if (!vec) vec = table.find(lower);
    if (!vec) continue;
    double w = 1.0;
    if (idf != nullptr) {
      const auto i = idf->unigrams().index_of(lower);
      w = idf->idf(i ? idf->unigrams().df()[*i] : 0);
    }
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += w * (*vec)[k];
    total_weight += w;
  }
  if (total_weight > 0.0) {
    for (auto& x : sum) x /= total_weight;
  }
  return SparseVector::from_dense(sum);
}

// --- extractor -----------------------------------------------------------------

FeatureExtractor::FeatureExtractor(Vectorizer vectorizer, std::shared_ptr<const Lexicon> lexicon,
                                   std::shared_ptr<const EmbeddingTable> embeddings)
    : vectorizer_(std::move(vectorizer)), lexicon_(std::move(lexicon)), embeddings_(std::move(embeddings)) {
  const auto& cfg = vectorizer_.config();
  if (cfg.lexicon && !lexicon_) throw ConfigError("lexicon features enabled but no lexicon supplied");
  if (cfg.embeddings && (!embeddings_ || embeddings_->empty())) {
    throw ConfigError("embedding features enabled but no embedding table supplied");
  }
  auto add = [this](Family f, std::size_t dim) {
    layout_.push_back({f, dim_, dim});
    dim_ += dim;
  };
  if (cfg.tfidf) add(Family::tfidf, vectorizer_.unigrams().size());
  if (cfg.word_ngrams) add(Family::word_ngrams, vectorizer_.word_ngram_vocab().size());
  if (cfg.char_ngrams) add(Family::char_ngrams, vectorizer_.char_ngram_vocab().size());
  if (cfg.negation) add(Family::negation, kNegationDim);
  if (cfg.punctuation) add(Family::punctuation, kPunctuationDim);
  if (cfg.lexicon) add(Family::lexicon, kLexiconDim);
  if (cfg.embeddings) add(Family::embeddings, embeddings_->dim());
}

SparseVector FeatureExtractor::transform(std::string_view text) const {
  std::vector<SparseVector> blocks;
  blocks.reserve(layout_.size());
  for (const auto& block : layout_) {
    switch (block.family) {
      case Family::tfidf:
        blocks.push_back(vectorizer_.tfidf(text));
        break;
      case Family::word_ngrams:
        blocks.push_back(vectorizer_.word_ngram_features(text));
        break;
      case Family::char_ngrams:
        blocks.push_back(vectorizer_.char_ngram_features(text));
        break;
      case Family::negation:
        blocks.push_back(negation_features(text, vectorizer_.negations()));
        break;
      case Family::punctuation:
        blocks.push_back(punctuation_features(text));
        break;
      case Family::lexicon:
        blocks.push_back(lexicon_features(*lexicon_, text, vectorizer_.stopwords()));
        break;
      case Family::embeddings:
        blocks.push_back(embed_sentence(
            *embeddings_, text,
            vectorizer_.config().pooling == EmbeddingPooling::tfidf_mean ? &vectorizer_ : nullptr));
        break;
    }
  }
  return combine(blocks);
}

std::vector<SparseVector> FeatureExtractor::transform_all(std::span<const std::string> texts) const {
  std::vector<SparseVector> out(texts.size());
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(1, texts.size() / 64));
  if (workers <= 1) {
    for (std::size_t i = 0; i < texts.size(); ++i) out[i] = transform(texts[i]);
    return out;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < texts.size(); i += workers) out[i] = transform(texts[i]);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace emodist
