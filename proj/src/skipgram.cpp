#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <stdexcept>
#include <thread>

#include "emodist/embeddings.hpp"
#include "emodist/error.hpp"
#include "emodist/random.hpp"

namespace emodist {
namespace {

struct Vocab {
  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
};

Vocab build_vocab(std::span<const std::vector<std::string>> sentences, std::size_t min_count) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& sentence : sentences) {
    for (const auto& w : sentence) ++counts[w];
  }
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (auto& [w, c] : counts) {
    if (c >= min_count) kept.emplace_back(w, c);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocab vocab;
  for (auto& [w, c] : kept) {
    vocab.words.push_back(w);
    vocab.counts.push_back(c);
  }
  return vocab;
}

// Plain accesses for the single-threaded path; relaxed atomics when threads
// share the parameter matrices.
template <bool Shared>
inline float load(const float& x) {
  if constexpr (Shared) {
    return std::atomic_ref<float>(const_cast<float&>(x)).load(std::memory_order_relaxed);
  } else {
    return x;
  }
}

template <bool Shared>
inline void store(float& x, float v) {
  if constexpr (Shared) {
    std::atomic_ref<float>(x).store(v, std::memory_order_relaxed);
  } else {
    x = v;
  }
}

class Trainer {
 public:
  Trainer(const SkipGramConfig& cfg, const Vocab& vocab, std::vector<std::vector<std::uint32_t>> sentences)
      : cfg_(cfg), vocab_(vocab), sentences_(std::move(sentences)) {
    const std::size_t n = vocab_.words.size();
    input_.resize(n * cfg_.dim);
    output_.assign(n * cfg_.dim, 0.0f);
    Rng rng(mix_seed(cfg_.seed, 0));
    for (auto& x : input_) x = static_cast<float>((uniform01(rng) - 0.5) / static_cast<double>(cfg_.dim));

    cumulative_.resize(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += std::pow(static_cast<double>(vocab_.counts[i]), 0.75);
      cumulative_[i] = acc;
    }
    for (const auto& s : sentences_) words_per_epoch_ += s.size();
  }

  void run() {
    if (cfg_.threads <= 1) {
      Rng rng(mix_seed(cfg_.seed, 1));
      std::uint64_t processed = 0;
      for (std::size_t epoch = 0; epoch < cfg_.epochs; ++epoch) {
        train_range<false>(0, sentences_.size(), epoch, rng, processed);
      }
      return;
    }
    std::vector<std::thread> workers;
    const std::size_t chunk = (sentences_.size() + cfg_.threads - 1) / cfg_.threads;
    for (std::size_t t = 0; t < cfg_.threads; ++t) {
      workers.emplace_back([this, t, chunk] {
        Rng rng(mix_seed(cfg_.seed, 2 + t));
        const std::size_t begin = std::min(sentences_.size(), t * chunk);
        const std::size_t end = std::min(sentences_.size(), begin + chunk);
        // Progress is tracked per worker and scaled, as in the reference
        // implementation.
        std::uint64_t processed = 0;
        for (std::size_t epoch = 0; epoch < cfg_.epochs; ++epoch) {
          train_range<true>(begin, end, epoch, rng, processed, cfg_.threads);
        }
      });
    }
    for (auto& w : workers) w.join();
  }

  EmbeddingTable table() const {
    EmbeddingTable table(cfg_.dim);
    for (std::size_t i = 0; i < vocab_.words.size(); ++i) {
      table.set(vocab_.words[i], std::span<const float>(input_.data() + i * cfg_.dim, cfg_.dim));
    }
    return table;
  }

 private:
  std::uint32_t sample_negative(Rng& rng) const {
    const double r = uniform01(rng) * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
    return static_cast<std::uint32_t>(std::min<std::size_t>(it - cumulative_.begin(), cumulative_.size() - 1));
  }

  double learning_rate(std::uint64_t processed, std::size_t scale) const {
    const double total = static_cast<double>(words_per_epoch_) * static_cast<double>(cfg_.epochs) + 1.0;
    const double progress = static_cast<double>(processed * scale) / total;
    return std::max(cfg_.min_lr, cfg_.lr - (cfg_.lr - cfg_.min_lr) * progress);
  }

  template <bool Shared>
  void train_range(std::size_t begin, std::size_t end, std::size_t /*epoch*/, Rng& rng, std::uint64_t& processed,
                   std::size_t scale = 1) {
    const std::size_t dim = cfg_.dim;
    std::vector<float> grad(dim);
    for (std::size_t s = begin; s < end; ++s) {
      const auto& sentence = sentences_[s];
      for (std::size_t pos = 0; pos < sentence.size(); ++pos, ++processed) {
        const float alpha = static_cast<float>(learning_rate(processed, scale));
        const std::uint32_t center = sentence[pos];
        const std::size_t span = cfg_.window - uniform_index(rng, cfg_.window);
        const std::size_t lo = pos >= span ? pos - span : 0;
        const std::size_t hi = std::min(sentence.size() - 1, pos + span);
        for (std::size_t c = lo; c <= hi; ++c) {
          if (c == pos) continue;
          float* in = input_.data() + static_cast<std::size_t>(sentence[c]) * dim;
          std::fill(grad.begin(), grad.end(), 0.0f);
          for (std::size_t d = 0; d <= cfg_.negatives; ++d) {
            std::uint32_t target = center;
            float label = 1.0f;
            if (d > 0) {
              target = sample_negative(rng);
              if (target == center) continue;
              label = 0.0f;
            }
            float* out = output_.data() + static_cast<std::size_t>(target) * dim;
            float dot = 0.0f;
            for (std::size_t k = 0; k < dim; ++k) dot += load<Shared>(in[k]) * load<Shared>(out[k]);
            const float sig = 1.0f / (1.0f + std::exp(-std::clamp(dot, -30.0f, 30.0f)));
            const float g = (label - sig) * alpha;
            for (std::size_t k = 0; k < dim; ++k) {
              const float o = load<Shared>(out[k]);
              grad[k] += g * o;
              store<Shared>(out[k], o + g * load<Shared>(in[k]));
            }
          }
          for (std::size_t k = 0; k < dim; ++k) store<Shared>(in[k], load<Shared>(in[k]) + grad[k]);
        }
      }
    }
  }

  const SkipGramConfig& cfg_;
  const Vocab& vocab_;
  std::vector<std::vector<std::uint32_t>> sentences_;
  std::vector<float> input_;
  std::vector<float> output_;
  std::vector<double> cumulative_;
  std::uint64_t words_per_epoch_ = 0;
};

}  // namespace

void SkipGramConfig::validate() const {
  if (window == 0) throw ConfigError("skip-gram window must be >= 1");
  if (dim == 0) throw ConfigError("skip-gram dim must be >= 1");
  if (!(lr > 0.0) || !(min_lr >= 0.0) || min_lr > lr) throw ConfigError("skip-gram learning rates");
  if (epochs == 0) throw ConfigError("skip-gram epochs must be >= 1");
  if (min_count == 0) throw ConfigError("skip-gram min_count must be >= 1");
}

EmbeddingTable train_skipgram(std::span<const std::vector<std::string>> sentences, const SkipGramConfig& cfg) {
  cfg.validate();
  const Vocab vocab = build_vocab(sentences, cfg.min_count);
  if (vocab.words.empty()) throw DataError("skip-gram vocabulary is empty after min_count filtering");

  std::unordered_map<std::string, std::uint32_t> ids;
  for (std::size_t i = 0; i < vocab.words.size(); ++i) ids.emplace(vocab.words[i], static_cast<std::uint32_t>(i));
  std::vector<std::vector<std::uint32_t>> encoded;
  encoded.reserve(sentences.size());
  for (const auto& sentence : sentences) {
    std::vector<std::uint32_t> row;
    for (const auto& w : sentence) {
      const auto it = ids.find(w);
      if (it != ids.end()) row.push_back(it->second);
    }
    if (row.size() > 1) encoded.push_back(std::move(row));
  }

  Trainer trainer(cfg, vocab, std::move(encoded));
  trainer.run();
  return trainer.table();
}

}  // namespace emodist
