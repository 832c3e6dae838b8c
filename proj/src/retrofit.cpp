#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <stdexcept>

#include "emodist/embeddings.hpp"

namespace emodist {
namespace {

// Graph nodes resolved against a table; nodes missing from the table are
// dropped together with their edges.
struct ResolvedGraph {
  std::vector<std::size_t> node_to_row;  // graph node -> table row, or npos
  std::vector<std::vector<std::uint32_t>> neighbors;
};

constexpr std::size_t kMissing = static_cast<std::size_t>(-1);

ResolvedGraph resolve(const EmotionGraph& graph, const EmbeddingTable& table) {
  ResolvedGraph r;
  r.node_to_row.resize(graph.size(), kMissing);
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (const auto row = table.index_of(graph.words[i])) r.node_to_row[i] = *row;
  }
  r.neighbors.resize(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (r.node_to_row[i] == kMissing) continue;
    for (auto j : graph.neighbors[i]) {
      if (r.node_to_row[j] != kMissing) r.neighbors[i].push_back(j);
    }
  }
  return r;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += (a[k] - b[k]) * (a[k] - b[k]);
  return sum;
}

// Energy over dense per-node vectors (rows of `q` and `q_hat` indexed by node).
double energy(const EmotionGraph& graph, const ResolvedGraph& r, const std::vector<double>& q_hat,
              const std::vector<double>& q, std::size_t dim) {
  double total = 0.0;
  auto row = [dim](const std::vector<double>& m, std::size_t i) { return std::span<const double>(&m[i * dim], dim); };
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (r.neighbors[i].empty()) continue;
    total += graph.alpha[i] / graph.beta[i] * squared_distance(row(q, i), row(q_hat, i));
    for (auto j : r.neighbors[i]) {
      if (j > i) total += squared_distance(row(q, i), row(q, j));
    }
  }
  return total;
}

std::vector<double> gather(const EmbeddingTable& table, const ResolvedGraph& r) {
  const std::size_t dim = table.dim();
  std::vector<double> out(r.node_to_row.size() * dim, 0.0);
  for (std::size_t i = 0; i < r.node_to_row.size(); ++i) {
    if (r.node_to_row[i] == kMissing) continue;
    const auto v = table.vector(r.node_to_row[i]);
    std::copy(v.begin(), v.end(), out.begin() + static_cast<std::ptrdiff_t>(i * dim));
  }
  return out;
}

}  // namespace

EmotionGraph EmotionGraph::from_edges(std::vector<std::string> words,
                                      std::span<const std::pair<std::uint32_t, std::uint32_t>> edges) {
  EmotionGraph g;
  g.words = std::move(words);
  std::vector<std::set<std::uint32_t>> adj(g.words.size());
  for (const auto& [a, b] : edges) {
    if (a >= g.words.size() || b >= g.words.size()) throw std::out_of_range("edge endpoint out of range");
    if (a == b) continue;
    adj[a].insert(b);
    adj[b].insert(a);
  }
  for (const auto& s : adj) g.neighbors.emplace_back(s.begin(), s.end());
  g.set_default_weights();
  return g;
}

void EmotionGraph::set_default_weights() {
  alpha.assign(words.size(), 1.0);
  beta.resize(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    beta[i] = neighbors[i].empty() ? 1.0 : 1.0 / static_cast<double>(neighbors[i].size());
  }
}

void EmotionGraph::validate() const {
  const std::size_t n = words.size();
  if (neighbors.size() != n || alpha.size() != n || beta.size() != n) {
    throw std::invalid_argument("emotion graph arrays disagree in size");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(alpha[i] > 0.0) || !(beta[i] > 0.0)) throw std::invalid_argument("graph weights must be positive");
    for (auto j : neighbors[i]) {
      if (j >= n) throw std::invalid_argument("neighbour index out of range");
      if (j == i) throw std::invalid_argument("self loop at '" + words[i] + "'");
      const auto& back = neighbors[j];
      if (std::find(back.begin(), back.end(), static_cast<std::uint32_t>(i)) == back.end()) {
        throw std::invalid_argument("asymmetric edge " + words[i] + " -> " + words[j]);
      }
    }
  }
}

EmotionGraph build_emotion_graph(const Lexicon& lexicon, const EmbeddingTable& table, std::size_t max_degree) {
  std::vector<std::string> words;
  std::vector<LexiconFlags> flags;
  for (const auto& [word, f] : lexicon.entries()) {
    LexiconFlags emotions = f;
    emotions.reset(static_cast<std::size_t>(LexiconCategory::negative));
    emotions.reset(static_cast<std::size_t>(LexiconCategory::positive));
    if (emotions.none() || !table.index_of(word)) continue;
    words.push_back(word);  // lexicon order is lexicographic
    flags.push_back(emotions);
  }

  // Per-emotion member lists, sorted because `words` is.
  std::array<std::vector<std::uint32_t>, kLexiconEmotions> members;
  for (std::size_t i = 0; i < words.size(); ++i) {
    for (std::size_t e = 0; e < kLexiconEmotions; ++e) {
      if (flags[i].test(e)) members[e].push_back(static_cast<std::uint32_t>(i));
    }
  }

  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (std::size_t i = 0; i < words.size(); ++i) {
    // The first max_degree eligible partners overall are each among the
    // first max_degree + 1 members of some shared emotion list.
    std::vector<std::uint32_t> candidates;
    for (std::size_t e = 0; e < kLexiconEmotions; ++e) {
      if (!flags[i].test(e)) continue;
      const auto& list = members[e];
      const std::size_t take = std::min(list.size(), max_degree + 1);
      candidates.insert(candidates.end(), list.begin(), list.begin() + static_cast<std::ptrdiff_t>(take));
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    std::size_t kept = 0;
    for (auto j : candidates) {
      if (kept == max_degree) break;
      if (j == i) continue;
      edges.emplace_back(static_cast<std::uint32_t>(i), j);
      ++kept;
    }
  }
  return EmotionGraph::from_edges(std::move(words), edges);
}

EmbeddingTable retrofit(const EmbeddingTable& table, const EmotionGraph& graph, std::size_t iterations,
                        RetrofitTrace* trace) {
  if (iterations == 0) throw std::invalid_argument("retrofit needs at least one iteration");
  graph.validate();
  EmbeddingTable out = table;
  if (graph.empty()) return out;

  const std::size_t dim = table.dim();
  const ResolvedGraph r = resolve(graph, table);
  const std::vector<double> q_hat = gather(table, r);
  std::vector<double> q = q_hat;
  std::vector<double> next(dim);

  if (trace != nullptr) {
    trace->objective.assign(1, energy(graph, r, q_hat, q, dim));
    trace->max_displacement.clear();
  }

  for (std::size_t it = 0; it < iterations; ++it) {
    double max_move = 0.0;
    for (std::size_t i = 0; i < graph.size(); ++i) {
      const auto& nbrs = r.neighbors[i];
      if (nbrs.empty()) continue;
      const double a = graph.alpha[i];
      const double b = graph.beta[i];
      for (std::size_t k = 0; k < dim; ++k) next[k] = a * q_hat[i * dim + k];
      for (auto j : nbrs) {
        for (std::size_t k = 0; k < dim; ++k) next[k] += b * q[j * dim + k];
      }
      const double denom = a + b * static_cast<double>(nbrs.size());
      double move = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        next[k] /= denom;
        const double delta = next[k] - q[i * dim + k];
        move += delta * delta;
        q[i * dim + k] = next[k];
      }
      max_move = std::max(max_move, std::sqrt(move));
    }
    if (trace != nullptr) {
      trace->objective.push_back(energy(graph, r, q_hat, q, dim));
      trace->max_displacement.push_back(max_move);
    }
  }

  std::vector<float> row(dim);
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (r.neighbors[i].empty()) continue;
    for (std::size_t k = 0; k < dim; ++k) row[k] = static_cast<float>(q[i * dim + k]);
    std::copy(row.begin(), row.end(), out.mutable_vector(r.node_to_row[i]).begin());
  }
  return out;
}

double retrofit_objective(const EmbeddingTable& original, const EmbeddingTable& current, const EmotionGraph& graph) {
  graph.validate();
  const ResolvedGraph r = resolve(graph, original);
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (r.node_to_row[i] != kMissing && !current.index_of(graph.words[i])) {
      throw std::invalid_argument("current table lacks '" + graph.words[i] + "'");
    }
  }
  const std::vector<double> q_hat = gather(original, r);
  std::vector<double> q(q_hat.size(), 0.0);
  const std::size_t dim = original.dim();
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (r.node_to_row[i] == kMissing) continue;
    const auto v = *current.find(graph.words[i]);
    std::copy(v.begin(), v.end(), q.begin() + static_cast<std::ptrdiff_t>(i * dim));
  }
  return energy(graph, r, q_hat, q, dim);
}

}  // namespace emodist
