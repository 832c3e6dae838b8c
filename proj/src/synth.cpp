#include <stdexcept>

#include "emodist/corpus.hpp"
#include "emodist/random.hpp"

namespace emodist {
namespace {

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";
constexpr std::size_t kSyllables = kConsonants.size() * kVowels.size();

// Three consonant-vowel syllables encoding a global word id.
std::string pseudo_word(std::size_t id) {
  std::string word;
  for (int k = 0; k < 3; ++k) {
    const std::size_t syl = id % kSyllables;
    id /= kSyllables;
    word += kConsonants[syl / kVowels.size()];
    word += kVowels[syl % kVowels.size()];
  }
  return word;
}

}  // namespace

std::vector<std::string> synth_vocabulary(Emotion e, std::size_t vocab_per_class) {
  std::vector<std::string> words;
  words.reserve(vocab_per_class);
  for (std::size_t k = 0; k < vocab_per_class; ++k) words.push_back(pseudo_word(ordinal(e) * vocab_per_class + k));
  return words;
}

std::vector<LabeledDoc> synth_corpus(const SynthSpec& spec) {
  if (spec.n_docs == 0 || spec.vocab_per_class == 0) throw std::invalid_argument("synth_corpus: empty corpus spec");
  if (spec.vocab_per_class * kNumEmotions > kSyllables * kSyllables * kSyllables) {
    throw std::invalid_argument("synth_corpus: vocabulary too large");
  }
  if (!(spec.noise_rate >= 0.0 && spec.noise_rate < 1.0)) throw std::invalid_argument("synth_corpus: noise_rate");
  if (!(spec.label_noise >= 0.0 && spec.label_noise <= 1.0)) throw std::invalid_argument("synth_corpus: label_noise");
  if (spec.min_tokens == 0 || spec.min_tokens > spec.max_tokens) throw std::invalid_argument("synth_corpus: length");

  std::array<std::vector<std::string>, kNumEmotions> vocab;
  for (Emotion e : kEmotions) vocab[ordinal(e)] = synth_vocabulary(e, spec.vocab_per_class);

  Rng rng(spec.seed);
  std::vector<std::size_t> labels(spec.n_docs);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i % kNumEmotions;
  shuffle(std::span<std::size_t>(labels), rng);

  std::vector<LabeledDoc> docs;
  docs.reserve(spec.n_docs);
  for (std::size_t cls : labels) {
    const std::size_t length = spec.min_tokens + uniform_index(rng, spec.max_tokens - spec.min_tokens + 1);
    std::string text;
    for (std::size_t t = 0; t < length; ++t) {
      std::size_t part = cls;
      if (uniform01(rng) < spec.noise_rate) part = (cls + 1 + uniform_index(rng, kNumEmotions - 1)) % kNumEmotions;
      if (t > 0) text += ' ';
      text += vocab[part][uniform_index(rng, spec.vocab_per_class)];
    }
    std::size_t label = cls;
    if (spec.label_noise > 0.0 && uniform01(rng) < spec.label_noise) label = uniform_index(rng, kNumEmotions);
    docs.push_back({std::move(text), kEmotions[label], spec.source});
  }
  return docs;
}

std::vector<LabeledDoc> synth_corpus(std::size_t n_docs, std::size_t vocab_per_class, double noise_rate,
                                     std::uint64_t seed) {
  SynthSpec spec;
  spec.n_docs = n_docs;
  spec.vocab_per_class = vocab_per_class;
  spec.noise_rate = noise_rate;
  spec.seed = seed;
  return synth_corpus(spec);
}

}  // namespace emodist
