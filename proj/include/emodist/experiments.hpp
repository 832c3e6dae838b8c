#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emodist/classifier.hpp"
#include "emodist/corpus.hpp"
#include "emodist/embeddings.hpp"
#include "emodist/eval.hpp"
#include "emodist/features.hpp"

namespace emodist {

enum class SourceKind { reaction_feed, canonical_tsv, synthetic };

/// A named training or evaluation corpus.
struct SourceSpec {
  std::string name;
  SourceKind kind = SourceKind::canonical_tsv;
  std::filesystem::path path;  // unused for synthetic sources
  SynthSpec synth;             // used for synthetic sources only

  bool operator==(const SourceSpec&) const = default;
};

enum class EmbeddingMode { none, load, train, retrofit };

struct EmbeddingSettings {
  EmbeddingMode mode = EmbeddingMode::none;
  /// Vector file for `load`, and the base table for `retrofit` (when empty
  /// the base table is trained on the training corpus).
  std::filesystem::path path;
  /// Lexicon for `retrofit`; falls back to the experiment lexicon.
  std::filesystem::path lexicon;
  std::size_t iterations = 10;
  std::size_t max_degree = kDefaultMaxDegree;
  SkipGramConfig skipgram;

  bool operator==(const EmbeddingSettings&) const = default;
};

struct ExperimentConfig {
  std::vector<SourceSpec> train_sources;
  std::vector<SourceSpec> eval_datasets;
  /// Fraction of the training documents held out as the "holdout" dataset.
  double holdout_fraction = 0.0;
  std::uint64_t seed = 1;
  FeatureConfig features;
  TrainConfig train;
  EmbeddingSettings embeddings;
  std::filesystem::path lexicon;
  std::filesystem::path negations;
  std::filesystem::path stopwords;
  std::optional<double> max_entropy;
  LabelOptions labeling;
  std::filesystem::path output_dir;

  /// Throws ConfigError on any violated constraint; with `check_paths`,
  /// also when a referenced file does not exist.
  void validate(bool check_paths = true) const;
};

inline constexpr int kExperimentConfigVersion = 1;

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Unknown keys are rejected at every level. Relative paths are resolved
/// against `base_dir`.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// 64-bit FNV-1a of the canonical JSON form.
std::uint64_t config_hash(const ExperimentConfig& cfg);

// --- presets --------------------------------------------------------------------

struct Preset {
  std::string_view name;
  std::vector<std::string_view> sources;
};

const std::vector<Preset>& presets();
const Preset* find_preset(std::string_view name);

/// Config for a named preset: one reaction feed `<feeds_dir>/<source>.json`
/// per preset source, the default feature set (every family except the
/// lexicon) and, when `embeddings` is non-empty, that vector file.
ExperimentConfig preset_config(std::string_view name, const std::filesystem::path& feeds_dir,
                               const std::filesystem::path& embeddings = {});

// --- sources ------------------------------------------------------------------------

/// Loads a source as labeled documents. Reaction feeds are entropy-filtered
/// (when a threshold is set) and labeled; unlabeled posts are dropped.
std::vector<LabeledDoc> load_source(const SourceSpec& source, const LabelOptions& labeling = {},
                                    std::optional<double> max_entropy = std::nullopt);

struct SourceDistribution {
  std::string name;
  std::array<std::size_t, kNumEmotions> counts{};
  std::array<double, kNumEmotions> proportions{};
  std::size_t unlabeled = 0;

  std::size_t labeled() const noexcept;
};

/// Share of each emotion among a source's labeled posts. Unlabeled posts
/// (including posts removed by the entropy threshold) are only counted.
/// Throws DataError when nothing is labeled.
SourceDistribution source_distribution(const SourceSpec& source, const LabelOptions& labeling = {},
                                       std::optional<double> max_entropy = std::nullopt);
SourceDistribution distribution_of(std::string name, std::span<const LabeledDoc> docs, std::size_t unlabeled = 0);

nlohmann::json to_json(const SourceDistribution& d);

// --- pipeline ---------------------------------------------------------------------

struct Resources {
  std::shared_ptr<const Lexicon> lexicon;
  std::shared_ptr<const EmbeddingTable> embeddings;
  FitOptions fit;
};

struct Pipeline {
  FeatureExtractor extractor;
  LinearModel model;

  SparseVector features(std::string_view text) const { return extractor.transform(text); }
  Emotion predict(std::string_view text) const { return emodist::predict(model, features(text)); }
};

Pipeline train_pipeline(std::span<const LabeledDoc> docs, const FeatureConfig& features, const TrainConfig& train,
                        const Resources& resources = {});
EvalReport evaluate_pipeline(const Pipeline& pipeline, std::span<const LabeledDoc> docs);

/// Writes pipeline.json, vectorizer.json and model.json into `dir`. Resource
/// paths are recorded as given (relative ones resolve against `dir`).
void save_pipeline(const Pipeline& pipeline, const std::filesystem::path& dir,
                   const std::filesystem::path& lexicon_path = {}, const std::filesystem::path& embeddings_path = {});
Pipeline load_pipeline(const std::filesystem::path& dir);

// --- runs -------------------------------------------------------------------------

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct DatasetReport {
  std::string name;
  EvalReport report;
};

struct RunRecord {
  std::uint64_t config_hash = 0;
  std::vector<DatasetReport> reports;
  std::vector<StageTiming> timings;
  std::vector<SourceDistribution> distributions;
  std::vector<Block> layout;
  std::size_t feature_dim = 0;
  std::size_t n_train = 0;
};

nlohmann::json to_json(const RunRecord& record);

/// Loads sources, fits features and the classifier, evaluates every dataset
/// and, when `output_dir` is set, writes config.json, the pipeline files,
/// reports/<dataset>.{tsv,json} and run.json. Outputs are staged in a
/// sibling directory and only moved into place on success. Errors are
/// rethrown with the failing stage prefixed.
RunRecord run(const ExperimentConfig& cfg);

struct SearchResult {
  std::vector<std::string> sources;  // sorted names
  double micro_f1 = 0.0;
};

/// Trains the tf-idf-only model on every non-empty subset of at most `k_max`
/// candidates and ranks by dev micro-F1 (descending), then subset size, then
/// names. Requires 1 <= k_max <= |candidates| <= 15.
std::vector<SearchResult> page_search(std::span<const SourceSpec> candidates, const SourceSpec& dev,
                                      std::size_t k_max, const ExperimentConfig& base);

}  // namespace emodist
