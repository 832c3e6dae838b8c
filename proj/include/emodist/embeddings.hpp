#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "emodist/lexicon.hpp"

namespace emodist {

/// Word -> dense vector of a fixed dimension, in insertion order.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return words_.size(); }
  bool empty() const noexcept { return words_.empty(); }

  /// Inserts or overwrites; returns true when the word already existed.
  /// Throws std::invalid_argument when the vector length is not dim().
  bool set(std::string_view word, std::span<const float> values);

  std::optional<std::size_t> index_of(std::string_view word) const;
  std::optional<std::span<const float>> find(std::string_view word) const;

  const std::string& word(std::size_t i) const { return words_[i]; }
  const std::vector<std::string>& words() const noexcept { return words_; }
  std::span<const float> vector(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  std::span<float> mutable_vector(std::size_t i) { return {data_.data() + i * dim_, dim_}; }

  bool operator==(const EmbeddingTable& other) const {
    return dim_ == other.dim_ && words_ == other.words_ && data_ == other.data_;
  }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<float> data_;
};

/// word2vec text format: a `count dim` header, then `word v1 ... vd` rows.
/// A row with the wrong number of values or an unparseable float throws
/// RecordError carrying the 1-based line number. A header count that
/// disagrees with the rows, and duplicate words (last one wins), produce
/// warnings.
EmbeddingTable parse_vectors(std::string_view text, std::vector<std::string>* warnings = nullptr);
EmbeddingTable load_vectors(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

/// Writes the same format with shortest round-trip float formatting.
std::string write_vectors(const EmbeddingTable& table);

double cosine(std::span<const float> a, std::span<const float> b) noexcept;

// --- skip-gram -------------------------------------------------------------

struct SkipGramConfig {
  std::size_t window = 5;
  double lr = 0.01;
  double min_lr = 0.0001;
  std::size_t dim = 100;
  std::size_t min_count = 2;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  std::uint64_t seed = 1;
  /// Worker threads. Anything above 1 uses unsynchronized shared updates and
  /// gives up run-to-run reproducibility.
  std::size_t threads = 1;

  void validate() const;
  bool operator==(const SkipGramConfig&) const = default;
};

/// Skip-gram with negative sampling. Words seen fewer than min_count times
/// are dropped; the returned input vectors are ordered by descending count,
/// then word. Throws DataError when no word survives the filter.
EmbeddingTable train_skipgram(std::span<const std::vector<std::string>> sentences, const SkipGramConfig& cfg = {});

// --- retrofitting ------------------------------------------------------------

/// Undirected word graph for retrofitting. Edge weight beta[i] applies to
/// every edge leaving word i; alpha[i] anchors word i to its original vector.
struct EmotionGraph {
  std::vector<std::string> words;
  std::vector<std::vector<std::uint32_t>> neighbors;
  std::vector<double> alpha;
  std::vector<double> beta;

  std::size_t size() const noexcept { return words.size(); }
  bool empty() const noexcept { return words.empty(); }

  /// Builds a graph from undirected edges (by word index) with alpha = 1 and
  /// beta = 1 / degree. Self loops and repeated edges are ignored.
  static EmotionGraph from_edges(std::vector<std::string> words,
                                 std::span<const std::pair<std::uint32_t, std::uint32_t>> edges);

  /// Resets alpha to 1 and beta to 1 / degree.
  void set_default_weights();

  /// Throws std::invalid_argument unless the adjacency is symmetric, free of
  /// self loops and all weights are positive.
  void validate() const;
};

inline constexpr std::size_t kDefaultMaxDegree = 50;

/// Connects lexicon words present in the table that share at least one of
/// the eight emotion flags. Each word proposes its `max_degree`
/// lexicographically first partners; proposals are then symmetrized.
EmotionGraph build_emotion_graph(const Lexicon& lexicon, const EmbeddingTable& table,
                                 std::size_t max_degree = kDefaultMaxDegree);

struct RetrofitTrace {
  /// objective[0] is the energy of the input, objective[k] after sweep k.
  std::vector<double> objective;
  /// Largest per-word Euclidean move during sweep k (1-based: index k-1).
  std::vector<double> max_displacement;
};

/// In-order Gauss-Seidel sweeps of
///   q_i <- (alpha_i q^_i + sum_j beta_i q_j) / (alpha_i + deg_i beta_i)
/// over graph words present in the table. Words without neighbours keep
/// their vectors; the input table is not modified.
EmbeddingTable retrofit(const EmbeddingTable& table, const EmotionGraph& graph, std::size_t iterations = 10,
                        RetrofitTrace* trace = nullptr);

/// Energy minimized coordinate-wise by each retrofit update:
///   sum_i (alpha_i / beta_i) |q_i - q^_i|^2 + sum_{i~j} |q_i - q_j|^2
/// over graph words present in both tables (each undirected edge once).
double retrofit_objective(const EmbeddingTable& original, const EmbeddingTable& current, const EmotionGraph& graph);

}  // namespace emodist
