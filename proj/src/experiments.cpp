#include "emodist/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>
#include <unistd.h>

#include "emodist/error.hpp"
#include "emodist/io.hpp"
#include "emodist/random.hpp"
#include "emodist/text.hpp"

namespace emodist {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr std::uint64_t kHoldoutTag = 0x686f6c646f7574ULL;
constexpr std::string_view kPipelineFormat = "emodist.pipeline";
constexpr int kPipelineVersion = 1;
constexpr std::size_t kMaxSearchCandidates = 15;

// --- config parsing -------------------------------------------------------

const json& expect_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  return j;
}

std::string get_string(const json& v, const std::string& where) {
  if (!v.is_string()) throw ConfigError(where + " must be a string");
  return v.get<std::string>();
}

std::uint64_t get_uint(const json& v, const std::string& where) {
  if (!v.is_number_unsigned()) throw ConfigError(where + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

double get_double(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + " must be a number");
  return v.get<double>();
}

bool get_bool(const json& v, const std::string& where) {
  if (!v.is_boolean()) throw ConfigError(where + " must be a boolean");
  return v.get<bool>();
}

fs::path get_path(const json& v, const std::string& where, const fs::path& base) {
  fs::path p = get_string(v, where);
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

std::string_view to_string(SourceKind k) {
  switch (k) {
    case SourceKind::reaction_feed: return "reaction_feed";
    case SourceKind::canonical_tsv: return "canonical_tsv";
    case SourceKind::synthetic: return "synthetic";
  }
  return "?";
}

SourceKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "reaction_feed") return SourceKind::reaction_feed;
  if (s == "canonical_tsv") return SourceKind::canonical_tsv;
  if (s == "synthetic") return SourceKind::synthetic;
  throw ConfigError(where + " must be reaction_feed, canonical_tsv or synthetic");
}

std::string_view to_string(EmbeddingMode m) {
  switch (m) {
    case EmbeddingMode::none: return "none";
    case EmbeddingMode::load: return "load";
    case EmbeddingMode::train: return "train";
    case EmbeddingMode::retrofit: return "retrofit";
  }
  return "?";
}

EmbeddingMode parse_mode(const std::string& s) {
  if (s == "none") return EmbeddingMode::none;
  if (s == "load") return EmbeddingMode::load;
  if (s == "train") return EmbeddingMode::train;
  if (s == "retrofit") return EmbeddingMode::retrofit;
  throw ConfigError("embeddings.mode must be none, load, train or retrofit");
}

json synth_json(const SynthSpec& s) {
  return json{{"n_docs", s.n_docs},         {"vocab_per_class", s.vocab_per_class}, {"noise_rate", s.noise_rate},
              {"label_noise", s.label_noise}, {"min_tokens", s.min_tokens},         {"max_tokens", s.max_tokens},
              {"seed", s.seed}};
}

SynthSpec synth_from_json(const json& j, const std::string& where) {
  expect_object(j, where);
  SynthSpec s;
  for (const auto& [key, value] : j.items()) {
    const auto w = where + "." + key;
    if (key == "n_docs") {
      s.n_docs = get_uint(value, w);
    } else if (key == "vocab_per_class") {
      s.vocab_per_class = get_uint(value, w);
    } else if (key == "noise_rate") {
      s.noise_rate = get_double(value, w);
    } else if (key == "label_noise") {
      s.label_noise = get_double(value, w);
    } else if (key == "min_tokens") {
      s.min_tokens = get_uint(value, w);
    } else if (key == "max_tokens") {
      s.max_tokens = get_uint(value, w);
    } else if (key == "seed") {
      s.seed = get_uint(value, w);
    } else {
      throw ConfigError("unknown key " + w);
    }
  }
  return s;
}

json source_json(const SourceSpec& s) {
  json j{{"name", s.name}, {"kind", to_string(s.kind)}};
  if (s.kind == SourceKind::synthetic) {
    j["synthetic"] = synth_json(s.synth);
  } else {
    j["path"] = s.path.generic_string();
  }
  return j;
}

SourceSpec source_from_json(const json& j, const std::string& where, const fs::path& base) {
  expect_object(j, where);
  SourceSpec s;
  bool has_kind = false;
  for (const auto& [key, value] : j.items()) {
    const auto w = where + "." + key;
    if (key == "name") {
      s.name = get_string(value, w);
    } else if (key == "kind") {
      s.kind = parse_kind(get_string(value, w), w);
      has_kind = true;
    } else if (key == "path") {
      s.path = get_path(value, w, base);
    } else if (key == "synthetic") {
      s.synth = synth_from_json(value, w);
    } else {
      throw ConfigError("unknown key " + w);
    }
  }
  if (!has_kind) s.kind = s.path.extension() == ".json" ? SourceKind::reaction_feed : SourceKind::canonical_tsv;
  s.synth.source = s.name;
  return s;
}

std::vector<SourceSpec> sources_from_json(const json& j, const std::string& where, const fs::path& base) {
  if (!j.is_array()) throw ConfigError(where + " must be an array");
  std::vector<SourceSpec> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(source_from_json(j[i], where + "[" + std::to_string(i) + "]", base));
  }
  return out;
}

json skipgram_json(const SkipGramConfig& c) {
  return json{{"window", c.window},       {"lr", c.lr},         {"min_lr", c.min_lr},
              {"dim", c.dim},             {"min_count", c.min_count}, {"negatives", c.negatives},
              {"epochs", c.epochs},       {"seed", c.seed},     {"threads", c.threads}};
}

SkipGramConfig skipgram_from_json(const json& j) {
  expect_object(j, "embeddings.skipgram");
  SkipGramConfig c;
  for (const auto& [key, value] : j.items()) {
    const auto w = "embeddings.skipgram." + key;
    if (key == "window") {
      c.window = get_uint(value, w);
    } else if (key == "lr") {
      c.lr = get_double(value, w);
    } else if (key == "min_lr") {
      c.min_lr = get_double(value, w);
    } else if (key == "dim") {
      c.dim = get_uint(value, w);
    } else if (key == "min_count") {
      c.min_count = get_uint(value, w);
    } else if (key == "negatives") {
      c.negatives = get_uint(value, w);
    } else if (key == "epochs") {
      c.epochs = get_uint(value, w);
    } else if (key == "seed") {
      c.seed = get_uint(value, w);
    } else if (key == "threads") {
      c.threads = get_uint(value, w);
    } else {
      throw ConfigError("unknown key " + w);
    }
  }
  return c;
}

json embedding_json(const EmbeddingSettings& e) {
  return json{{"mode", to_string(e.mode)},
              {"path", e.path.generic_string()},
              {"lexicon", e.lexicon.generic_string()},
              {"iterations", e.iterations},
              {"max_degree", e.max_degree},
              {"skipgram", skipgram_json(e.skipgram)}};
}

EmbeddingSettings embedding_from_json(const json& j, const fs::path& base) {
  expect_object(j, "embeddings");
  EmbeddingSettings e;
  for (const auto& [key, value] : j.items()) {
    const auto w = "embeddings." + key;
    if (key == "mode") {
      e.mode = parse_mode(get_string(value, w));
    } else if (key == "path") {
      e.path = get_path(value, w, base);
    } else if (key == "lexicon") {
      e.lexicon = get_path(value, w, base);
    } else if (key == "iterations") {
      e.iterations = get_uint(value, w);
    } else if (key == "max_degree") {
      e.max_degree = get_uint(value, w);
    } else if (key == "skipgram") {
      e.skipgram = skipgram_from_json(value);
    } else {
      throw ConfigError("unknown key " + w);
    }
  }
  return e;
}

json labeling_json(const LabelOptions& l) {
  return json{{"ties", l.ties == TiePolicy::first_slot ? "first_slot" : "discard"},
              {"sum_before_argmax", l.sum_before_argmax}};
}

LabelOptions labeling_from_json(const json& j) {
  expect_object(j, "labeling");
  LabelOptions l;
  for (const auto& [key, value] : j.items()) {
    const auto w = "labeling." + key;
    if (key == "ties") {
      const auto s = get_string(value, w);
      if (s == "first_slot") {
        l.ties = TiePolicy::first_slot;
      } else if (s == "discard") {
        l.ties = TiePolicy::discard;
      } else {
        throw ConfigError(w + " must be first_slot or discard");
      }
    } else if (key == "sum_before_argmax") {
      l.sum_before_argmax = get_bool(value, w);
    } else {
      throw ConfigError("unknown key " + w);
    }
  }
  return l;
}

bool valid_name(const std::string& name) {
  if (name.empty() || name == "." || name == "..") return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' || c == '_' ||
           c == '-';
  });
}

void validate_sources(const std::vector<SourceSpec>& sources, const std::string& where, bool check_paths) {
  std::set<std::string> seen;
  for (const auto& s : sources) {
    if (!valid_name(s.name)) {
      throw ConfigError(where + ": source name '" + s.name + "' must be non-empty and use only [A-Za-z0-9._-]");
    }
    if (!seen.insert(s.name).second) throw ConfigError(where + ": duplicate source name '" + s.name + "'");
    if (s.kind == SourceKind::synthetic) {
      if (s.synth.n_docs == 0 || s.synth.vocab_per_class == 0) {
        throw ConfigError(where + ": synthetic source '" + s.name + "' needs n_docs and vocab_per_class > 0");
      }
      if (s.synth.min_tokens == 0 || s.synth.min_tokens > s.synth.max_tokens) {
        throw ConfigError(where + ": synthetic source '" + s.name + "' needs 0 < min_tokens <= max_tokens");
      }
      if (!(s.synth.noise_rate >= 0.0 && s.synth.noise_rate <= 1.0) ||
          !(s.synth.label_noise >= 0.0 && s.synth.label_noise <= 1.0)) {
        throw ConfigError(where + ": synthetic source '" + s.name + "' rates must lie in [0, 1]");
      }
      continue;
    }
    if (s.path.empty()) throw ConfigError(where + ": source '" + s.name + "' has no path");
    if (check_paths && !fs::exists(s.path)) {
      throw ConfigError(where + ": source '" + s.name + "': no such file " + s.path.string());
    }
  }
}

void check_file(const fs::path& p, const std::string& what, bool check_paths) {
  if (check_paths && !p.empty() && !fs::exists(p)) throw ConfigError(what + ": no such file " + p.string());
}

// --- runs -----------------------------------------------------------------

class StageClock {
 public:
  explicit StageClock(std::vector<StageTiming>& out) : out_(out) {}

  template <class F>
  auto operator()(const std::string& stage, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    auto done = [&] {
      const std::chrono::duration<double> d = std::chrono::steady_clock::now() - start;
      out_.push_back({stage, d.count()});
    };
    try {
      if constexpr (std::is_void_v<decltype(f())>) {
        f();
        done();
      } else {
        auto result = f();
        done();
        return result;
      }
    } catch (const ParseError& e) {
      throw ParseError(stage + ": " + e.what(), e.offset());
    } catch (const RecordError& e) {
      throw RecordError(e.record(), stage + ": " + e.reason());
    } catch (const ConfigError& e) {
      throw ConfigError(stage + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(stage + ": " + e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error(stage + ": " + e.what());
    }
  }

 private:
  std::vector<StageTiming>& out_;
};

struct LoadedSource {
  std::vector<LabeledDoc> docs;
  SourceDistribution distribution;
};

LoadedSource load_with_distribution(const SourceSpec& source, const LabelOptions& labeling,
                                    std::optional<double> max_entropy) {
  LoadedSource out;
  std::size_t unlabeled = 0;
  std::vector<Emotion> labels;
  switch (source.kind) {
    case SourceKind::reaction_feed: {
      auto posts = load_reaction_feed(source.path);
      for (const auto& post : posts) {
        if (max_entropy) {
          const auto h = reaction_entropy(post);
          if (!h || *h > *max_entropy) {
            ++unlabeled;
            continue;
          }
        }
        const auto label = assign_label(post, labeling);
        if (!label) {
          ++unlabeled;
          continue;
        }
        labels.push_back(*label);
        if (!trim(post.message).empty()) out.docs.push_back({post.message, *label, source.name});
      }
      break;
    }
    case SourceKind::canonical_tsv:
      out.docs = load_canonical_tsv(source.path);
      break;
    case SourceKind::synthetic: {
      auto spec = source.synth;
      spec.source = source.name;
      out.docs = synth_corpus(spec);
      break;
    }
  }
  if (source.kind != SourceKind::reaction_feed) {
    for (const auto& d : out.docs) labels.push_back(d.label);
  }
  std::array<std::size_t, kNumEmotions> counts{};
  for (auto l : labels) ++counts[ordinal(l)];
  out.distribution.name = source.name;
  out.distribution.counts = counts;
  out.distribution.unlabeled = unlabeled;
  const auto total = labels.size();
  if (total > 0) {
    for (std::size_t k = 0; k < kNumEmotions; ++k) {
      out.distribution.proportions[k] = static_cast<double>(counts[k]) / static_cast<double>(total);
    }
  }
  return out;
}

Resources load_resources(const ExperimentConfig& cfg) {
  Resources r;
  if (!cfg.lexicon.empty()) r.lexicon = std::make_shared<const Lexicon>(Lexicon::load(cfg.lexicon));
  if (!cfg.negations.empty()) r.fit.negations = load_word_list(cfg.negations);
  if (!cfg.stopwords.empty()) r.fit.stopwords = load_word_list(cfg.stopwords);
  return r;
}

std::vector<std::string> texts_of(std::span<const LabeledDoc> docs) {
  std::vector<std::string> texts;
  texts.reserve(docs.size());
  for (const auto& d : docs) texts.push_back(d.text);
  return texts;
}

std::vector<Emotion> labels_of(std::span<const LabeledDoc> docs) {
  std::vector<Emotion> labels;
  labels.reserve(docs.size());
  for (const auto& d : docs) labels.push_back(d.label);
  return labels;
}

std::string dump_file(const json& j) { return j.dump(2) + "\n"; }

fs::path staging_dir(const fs::path& out) {
  auto name = out.filename().string();
  if (name.empty()) name = out.parent_path().filename().string();
  return out.parent_path() / ("." + name + ".partial-" + std::to_string(::getpid()));
}

}  // namespace

// --- config ----------------------------------------------------------------

void ExperimentConfig::validate(bool check_paths) const {
  if (train_sources.empty()) throw ConfigError("at least one training source is required");
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) {
    throw ConfigError("holdout_fraction must lie in [0, 1)");
  }
  if (eval_datasets.empty() && holdout_fraction == 0.0) {
    throw ConfigError("at least one evaluation dataset (or a holdout_fraction) is required");
  }
  validate_sources(train_sources, "train_sources", check_paths);
  validate_sources(eval_datasets, "eval_datasets", check_paths);
  if (holdout_fraction > 0.0) {
    for (const auto& d : eval_datasets) {
      if (d.name == "holdout") throw ConfigError("eval_datasets: the name 'holdout' is reserved");
    }
  }
  features.validate();
  train.validate();
  if (max_entropy && !(*max_entropy >= 0.0)) throw ConfigError("max_entropy must be non-negative");
  if (features.lexicon && lexicon.empty()) throw ConfigError("lexicon features need a lexicon path");
  check_file(lexicon, "lexicon", check_paths);
  check_file(negations, "negations", check_paths);
  check_file(stopwords, "stopwords", check_paths);

  const bool has_embeddings = embeddings.mode != EmbeddingMode::none;
  if (features.embeddings != has_embeddings) {
    throw ConfigError("features.embeddings must be enabled exactly when embeddings.mode is not none");
  }
  switch (embeddings.mode) {
    case EmbeddingMode::none:
    case EmbeddingMode::train:
      break;
    case EmbeddingMode::load:
      if (embeddings.path.empty()) throw ConfigError("embeddings.mode load needs embeddings.path");
      break;
    case EmbeddingMode::retrofit:
      if (embeddings.lexicon.empty() && lexicon.empty()) {
        throw ConfigError("embeddings.mode retrofit needs embeddings.lexicon or lexicon");
      }
      break;
  }
  if (embeddings.mode == EmbeddingMode::train ||
      (embeddings.mode == EmbeddingMode::retrofit && embeddings.path.empty())) {
    embeddings.skipgram.validate();
  }
  check_file(embeddings.path, "embeddings.path", check_paths);
  check_file(embeddings.lexicon, "embeddings.lexicon", check_paths);
}

json to_json(const ExperimentConfig& cfg) {
  json train = json::array();
  for (const auto& s : cfg.train_sources) train.push_back(source_json(s));
  json evals = json::array();
  for (const auto& s : cfg.eval_datasets) evals.push_back(source_json(s));
  return json{{"version", kExperimentConfigVersion},
              {"seed", cfg.seed},
              {"train_sources", train},
              {"eval_datasets", evals},
              {"holdout_fraction", cfg.holdout_fraction},
              {"features", to_json(cfg.features)},
              {"train", to_json(cfg.train)},
              {"embeddings", embedding_json(cfg.embeddings)},
              {"lexicon", cfg.lexicon.generic_string()},
              {"negations", cfg.negations.generic_string()},
              {"stopwords", cfg.stopwords.generic_string()},
              {"max_entropy", cfg.max_entropy ? json(*cfg.max_entropy) : json(nullptr)},
              {"labeling", labeling_json(cfg.labeling)},
              {"output_dir", cfg.output_dir.generic_string()}};
}

ExperimentConfig experiment_config_from_json(const json& j, const fs::path& base_dir) {
  expect_object(j, "config");
  if (!j.contains("version")) throw ConfigError("config: missing version");
  if (j["version"] != kExperimentConfigVersion) {
    throw ConfigError("config: unsupported version " + j["version"].dump());
  }
  ExperimentConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "version") {
      continue;
    } else if (key == "seed") {
      cfg.seed = get_uint(value, key);
    } else if (key == "train_sources") {
      cfg.train_sources = sources_from_json(value, key, base_dir);
    } else if (key == "eval_datasets") {
      cfg.eval_datasets = sources_from_json(value, key, base_dir);
    } else if (key == "holdout_fraction") {
      cfg.holdout_fraction = get_double(value, key);
    } else if (key == "features") {
      cfg.features = feature_config_from_json(value);
    } else if (key == "train") {
      cfg.train = train_config_from_json(value);
    } else if (key == "embeddings") {
      cfg.embeddings = embedding_from_json(value, base_dir);
    } else if (key == "lexicon") {
      cfg.lexicon = get_path(value, key, base_dir);
    } else if (key == "negations") {
      cfg.negations = get_path(value, key, base_dir);
    } else if (key == "stopwords") {
      cfg.stopwords = get_path(value, key, base_dir);
    } else if (key == "max_entropy") {
      if (value.is_null()) {
        cfg.max_entropy.reset();
      } else {
        cfg.max_entropy = get_double(value, key);
      }
    } else if (key == "labeling") {
      cfg.labeling = labeling_from_json(value);
    } else if (key == "output_dir") {
      cfg.output_dir = get_path(value, key, base_dir);
    } else {
      throw ConfigError("unknown key " + key);
    }
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  return experiment_config_from_json(j, path.parent_path());
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_json(cfg).dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// --- presets --------------------------------------------------------------

const std::vector<Preset>& presets() {
  static const std::vector<Preset> kPresets = {
      {"b-m", {"Time", "TheGuardian", "Disney"}},
      {"ft-m", {"HuffPostWeirdNews", "ESPN", "CNN"}},
      {"ise-m", {"Time", "TheGuardian", "CookingLight"}},
  };
  return kPresets;
}

const Preset* find_preset(std::string_view name) {
  for (const auto& p : presets()) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

ExperimentConfig preset_config(std::string_view name, const fs::path& feeds_dir, const fs::path& embeddings) {
  const auto* preset = find_preset(name);
  if (!preset) throw ConfigError("unknown preset '" + std::string(name) + "' (expected b-m, ft-m or ise-m)");
  ExperimentConfig cfg;
  for (auto source : preset->sources) {
    SourceSpec s;
    s.name = std::string(source);
    s.kind = SourceKind::reaction_feed;
    s.path = feeds_dir / (s.name + ".json");
    cfg.train_sources.push_back(std::move(s));
  }
  cfg.features = FeatureConfig{};
  cfg.features.lexicon = false;
  if (!embeddings.empty()) {
    cfg.features.embeddings = true;
    cfg.embeddings.mode = EmbeddingMode::load;
    cfg.embeddings.path = embeddings;
  }
  return cfg;
}

// --- sources ----------------------------------------------------------------

std::vector<LabeledDoc> load_source(const SourceSpec& source, const LabelOptions& labeling,
                                    std::optional<double> max_entropy) {
  return load_with_distribution(source, labeling, max_entropy).docs;
}

std::size_t SourceDistribution::labeled() const noexcept { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

SourceDistribution source_distribution(const SourceSpec& source, const LabelOptions& labeling,
                                       std::optional<double> max_entropy) {
  auto d = load_with_distribution(source, labeling, max_entropy).distribution;
  if (d.labeled() == 0) throw DataError(source.name + ": no labeled posts");
  return d;
}

SourceDistribution distribution_of(std::string name, std::span<const LabeledDoc> docs, std::size_t unlabeled) {
  if (docs.empty()) throw DataError(name + ": no labeled posts");
  SourceDistribution d;
  d.name = std::move(name);
  d.unlabeled = unlabeled;
  for (const auto& doc : docs) ++d.counts[ordinal(doc.label)];
  for (std::size_t k = 0; k < kNumEmotions; ++k) {
    d.proportions[k] = static_cast<double>(d.counts[k]) / static_cast<double>(docs.size());
  }
  return d;
}

json to_json(const SourceDistribution& d) {
  json counts = json::object();
  json proportions = json::object();
  for (auto e : kEmotions) {
    counts[std::string(to_string(e))] = d.counts[ordinal(e)];
    proportions[std::string(to_string(e))] = d.proportions[ordinal(e)];
  }
  return json{{"name", d.name}, {"counts", counts}, {"proportions", proportions}, {"unlabeled", d.unlabeled}};
}

// --- pipeline ------------------------------------------------------------------

Pipeline train_pipeline(std::span<const LabeledDoc> docs, const FeatureConfig& features, const TrainConfig& train,
                        const Resources& resources) {
  if (docs.empty()) throw DataError("no training documents");
  const auto texts = texts_of(docs);
  FeatureExtractor extractor(Vectorizer::fit(texts, features, resources.fit), resources.lexicon, resources.embeddings);
  const auto X = extractor.transform_all(texts);
  const auto y = labels_of(docs);
  auto model = emodist::train(X, y, train);
  return Pipeline{std::move(extractor), std::move(model)};
}

EvalReport evaluate_pipeline(const Pipeline& pipeline, std::span<const LabeledDoc> docs) {
  if (docs.empty()) throw DataError("no evaluation documents");
  const auto X = pipeline.extractor.transform_all(texts_of(docs));
  const auto predicted = predict_all(pipeline.model, X);
  const auto gold = labels_of(docs);
  return evaluate(gold, predicted);
}

void save_pipeline(const Pipeline& pipeline, const fs::path& dir, const fs::path& lexicon_path,
                   const fs::path& embeddings_path) {
  fs::create_directories(dir);
  json manifest{{"format", kPipelineFormat},
                {"version", kPipelineVersion},
                {"vectorizer", "vectorizer.json"},
                {"model", "model.json"},
                {"lexicon", lexicon_path.empty() ? json(nullptr) : json(lexicon_path.generic_string())},
                {"embeddings", embeddings_path.empty() ? json(nullptr) : json(embeddings_path.generic_string())}};
  write_file(dir / "vectorizer.json", pipeline.extractor.vectorizer().to_json().dump() + "\n");
  write_file(dir / "model.json", to_json(pipeline.model).dump() + "\n");
  write_file(dir / "pipeline.json", dump_file(manifest));
}

Pipeline load_pipeline(const fs::path& dir) {
  auto parse = [&](const fs::path& p) {
    const auto text = read_file(p);
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(p.string() + ": " + e.what(), e.byte);
    }
  };
  const auto manifest = parse(dir / "pipeline.json");
  if (!manifest.is_object() || manifest.value("format", "") != kPipelineFormat ||
      manifest.value("version", 0) != kPipelineVersion) {
    throw DataError((dir / "pipeline.json").string() + ": not a version 1 pipeline manifest");
  }
  auto resolve = [&](const char* key) -> fs::path {
    const auto& v = manifest[key];
    if (v.is_null()) return {};
    if (!v.is_string()) throw DataError(std::string("pipeline.json: ") + key + " must be a string or null");
    fs::path p = v.get<std::string>();
    return p.is_relative() ? dir / p : p;
  };
  auto vectorizer = Vectorizer::from_json(parse(resolve("vectorizer")));
  auto model = model_from_json(parse(resolve("model")));
  std::shared_ptr<const Lexicon> lexicon;
  std::shared_ptr<const EmbeddingTable> embeddings;
  if (auto p = resolve("lexicon"); !p.empty()) lexicon = std::make_shared<const Lexicon>(Lexicon::load(p));
  if (auto p = resolve("embeddings"); !p.empty()) embeddings = std::make_shared<const EmbeddingTable>(load_vectors(p));
  FeatureExtractor extractor(std::move(vectorizer), std::move(lexicon), std::move(embeddings));
  if (extractor.dim() != model.dim) {
    throw DataError("pipeline: model expects " + std::to_string(model.dim) + " features, vectorizer produces " +
                    std::to_string(extractor.dim()));
  }
  return Pipeline{std::move(extractor), std::move(model)};
}

// --- runs ----------------------------------------------------------------------

json to_json(const RunRecord& r) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(r.config_hash));
  json reports = json::object();
  for (const auto& d : r.reports) reports[d.name] = to_json(d.report);
  json timings = json::array();
  for (const auto& t : r.timings) timings.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
  json distributions = json::array();
  for (const auto& d : r.distributions) distributions.push_back(to_json(d));
  json layout = json::array();
  for (const auto& b : r.layout) {
    layout.push_back({{"family", to_string(b.family)}, {"offset", b.offset}, {"dim", b.dim}});
  }
  return json{{"config_hash", hash},     {"n_train", r.n_train},       {"feature_dim", r.feature_dim},
              {"layout", layout},        {"distributions", distributions}, {"reports", reports},
              {"timings", timings}};
}

RunRecord run(const ExperimentConfig& cfg) {
  cfg.validate();
  RunRecord record;
  record.config_hash = config_hash(cfg);
  StageClock stage(record.timings);

  Resources resources = stage("resources", [&] { return load_resources(cfg); });

  std::vector<LabeledDoc> train_docs;
  std::vector<DatasetReport> pending;
  std::vector<std::vector<LabeledDoc>> eval_docs;
  stage("load", [&] {
    for (const auto& source : cfg.train_sources) {
      auto loaded = load_with_distribution(source, cfg.labeling, cfg.max_entropy);
      if (loaded.docs.empty()) throw DataError(source.name + ": no labeled posts");
      record.distributions.push_back(std::move(loaded.distribution));
      train_docs.insert(train_docs.end(), std::make_move_iterator(loaded.docs.begin()),
                        std::make_move_iterator(loaded.docs.end()));
    }
    if (cfg.holdout_fraction > 0.0) {
      const auto n = train_docs.size();
      const auto n_holdout = static_cast<std::size_t>(std::llround(cfg.holdout_fraction * static_cast<double>(n)));
      if (n_holdout == 0 || n_holdout >= n) {
        throw DataError("holdout_fraction leaves an empty training or holdout split");
      }
      Rng rng(mix_seed(cfg.seed, kHoldoutTag));
      auto order = shuffled_indices(n, rng);
      std::vector<bool> held(n, false);
      for (std::size_t i = 0; i < n_holdout; ++i) held[order[i]] = true;
      std::vector<LabeledDoc> kept, holdout;
      for (std::size_t i = 0; i < n; ++i) (held[i] ? holdout : kept).push_back(std::move(train_docs[i]));
      train_docs = std::move(kept);
      pending.push_back({"holdout", {}});
      eval_docs.push_back(std::move(holdout));
    }
    for (const auto& d : cfg.eval_datasets) {
      auto docs = load_source(d, cfg.labeling);
      if (docs.empty()) throw DataError(d.name + ": no labeled documents");
      pending.push_back({d.name, {}});
      eval_docs.push_back(std::move(docs));
    }
  });
  record.n_train = train_docs.size();

  bool wrote_embeddings = false;
  if (cfg.embeddings.mode != EmbeddingMode::none) {
    resources.embeddings = stage("embeddings", [&]() -> std::shared_ptr<const EmbeddingTable> {
      const auto& e = cfg.embeddings;
      if (e.mode == EmbeddingMode::load) return std::make_shared<const EmbeddingTable>(load_vectors(e.path));
      EmbeddingTable base;
      if (!e.path.empty()) {
        base = load_vectors(e.path);
      } else {
        std::vector<std::vector<std::string>> sentences;
        sentences.reserve(train_docs.size());
        for (const auto& d : train_docs) sentences.push_back(tokenize(d.text, cfg.features.lowercase));
        base = train_skipgram(sentences, e.skipgram);
      }
      wrote_embeddings = true;
      if (e.mode == EmbeddingMode::train) return std::make_shared<const EmbeddingTable>(std::move(base));
      const auto lexicon = e.lexicon.empty() ? Lexicon::load(cfg.lexicon) : Lexicon::load(e.lexicon);
      const auto graph = build_emotion_graph(lexicon, base, e.max_degree);
      return std::make_shared<const EmbeddingTable>(retrofit(base, graph, e.iterations));
    });
  }
  if (!cfg.features.lexicon) resources.lexicon.reset();

  auto [extractor, X] = stage("features", [&] {
    const auto texts = texts_of(train_docs);
    FeatureExtractor ex(Vectorizer::fit(texts, cfg.features, resources.fit), resources.lexicon, resources.embeddings);
    auto features = ex.transform_all(texts);
    return std::pair{std::move(ex), std::move(features)};
  });
  record.layout = extractor.layout();
  record.feature_dim = extractor.dim();

  auto model = stage("train", [&] {
    const auto y = labels_of(train_docs);
    return emodist::train(X, y, cfg.train);
  });
  const Pipeline pipeline{std::move(extractor), std::move(model)};

  stage("evaluate", [&] {
    for (std::size_t i = 0; i < pending.size(); ++i) {
      try {
        pending[i].report = evaluate_pipeline(pipeline, eval_docs[i]);
      } catch (const DataError& e) {
        throw DataError(pending[i].name + ": " + e.what());
      }
    }
  });
  record.reports = std::move(pending);

  if (!cfg.output_dir.empty()) {
    stage("write", [&] {
      const fs::path out = cfg.output_dir;
      const fs::path staging = staging_dir(out);
      try {
        fs::remove_all(staging);
        fs::create_directories(staging / "reports");
        write_file(staging / "config.json", dump_file(to_json(cfg)));
        fs::path embeddings_ref;
        if (resources.embeddings) {
          if (wrote_embeddings) {
            write_file(staging / "embeddings.txt", write_vectors(*resources.embeddings));
            embeddings_ref = "embeddings.txt";
          } else {
            embeddings_ref = fs::absolute(cfg.embeddings.path);
          }
        }
        const fs::path lexicon_ref = resources.lexicon ? fs::absolute(cfg.lexicon) : fs::path{};
        save_pipeline(pipeline, staging, lexicon_ref, embeddings_ref);
        for (const auto& r : record.reports) {
          write_file(staging / "reports" / (r.name + ".tsv"), render_report(r.report, ReportFormat::tsv));
          write_file(staging / "reports" / (r.name + ".json"), render_report(r.report, ReportFormat::json));
        }
        write_file(staging / "run.json", dump_file(to_json(record)));
        if (!out.parent_path().empty()) fs::create_directories(out.parent_path());
        fs::remove_all(out);
        fs::rename(staging, out);
      } catch (...) {
        std::error_code ignored;
        fs::remove_all(staging, ignored);
        throw;
      }
    });
  }
  return record;
}

// --- page search -----------------------------------------------------------------

std::vector<SearchResult> page_search(std::span<const SourceSpec> candidates, const SourceSpec& dev,
                                      std::size_t k_max, const ExperimentConfig& base) {
  const auto n = candidates.size();
  if (n == 0 || n > kMaxSearchCandidates) {
    throw ConfigError("page search needs between 1 and " + std::to_string(kMaxSearchCandidates) + " candidates");
  }
  if (k_max == 0 || k_max > n) throw ConfigError("k_max must lie in [1, number of candidates]");
  std::vector<SourceSpec> all(candidates.begin(), candidates.end());
  validate_sources(all, "candidates", true);
  validate_sources({dev}, "dev", true);
  base.train.validate();

  const auto resources = load_resources(base);
  std::vector<std::vector<LabeledDoc>> docs;
  for (const auto& c : candidates) {
    docs.push_back(load_source(c, base.labeling, base.max_entropy));
    if (docs.back().empty()) throw DataError(c.name + ": no labeled posts");
  }
  const auto dev_docs = load_source(dev, base.labeling);
  if (dev_docs.empty()) throw DataError(dev.name + ": no labeled documents");

  std::vector<std::uint32_t> masks;
  for (std::uint32_t m = 1; m < (1u << n); ++m) {
    if (static_cast<std::size_t>(std::popcount(m)) <= k_max) masks.push_back(m);
  }
  std::vector<SearchResult> results(masks.size());
  std::vector<std::exception_ptr> errors(masks.size());
  std::atomic<std::size_t> next{0};
  const auto features = FeatureConfig::tfidf_only();

  auto worker = [&] {
    for (std::size_t i = next++; i < masks.size(); i = next++) {
      try {
        std::vector<LabeledDoc> subset;
        SearchResult result;
        for (std::size_t c = 0; c < n; ++c) {
          if (!(masks[i] >> c & 1u)) continue;
          subset.insert(subset.end(), docs[c].begin(), docs[c].end());
          result.sources.push_back(candidates[c].name);
        }
        std::sort(result.sources.begin(), result.sources.end());
        const auto pipeline = train_pipeline(subset, features, base.train, resources);
        result.micro_f1 = evaluate_pipeline(pipeline, dev_docs).micro_f1;
        results[i] = std::move(result);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto n_threads = std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), masks.size());
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < n_threads; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::sort(results.begin(), results.end(), [](const SearchResult& a, const SearchResult& b) {
    if (a.micro_f1 != b.micro_f1) return a.micro_f1 > b.micro_f1;
    if (a.sources.size() != b.sources.size()) return a.sources.size() < b.sources.size();
    return a.sources < b.sources;
  });
  return results;
}

}  // namespace emodist
