#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emodist/emotion.hpp"
#include "emodist/error.hpp"

namespace emodist {

/// Reaction slots in feed order.
enum class Slot : std::size_t { total = 0, like, love, haha, wow, sad, angry, thankful };

inline constexpr std::size_t kNumSlots = 8;

/// The five slots that carry an emotion; also the tie-break order.
inline constexpr std::array<Slot, 5> kMeaningfulSlots = {Slot::love, Slot::haha, Slot::wow, Slot::sad,
                                                         Slot::angry};

using ReactionCounts = std::array<std::int64_t, kNumSlots>;

struct ReactionPost {
  std::string created_time;
  std::string message;
  ReactionCounts reactions{};

  std::int64_t count(Slot s) const noexcept { return reactions[static_cast<std::size_t>(s)]; }
  bool operator==(const ReactionPost&) const = default;
};

struct LabeledDoc {
  std::string text;
  Emotion label = Emotion::anger;
  std::string source;

  bool operator==(const LabeledDoc&) const = default;
};

enum class LoadMode {
  strict,    // first invalid record throws RecordError
  tolerant,  // invalid records are skipped and reported
};

// --- reaction feeds -------------------------------------------------------

/// Parses a reaction feed. Accepts the scraper's shape (an array of
/// single-element arrays, each wrapping one post object) as well as a flat
/// array of post objects. Malformed JSON throws ParseError with the byte
/// offset; a bad record throws RecordError in strict mode and is appended to
/// `skipped` in tolerant mode.
std::vector<ReactionPost> parse_reaction_feed(std::string_view json, LoadMode mode = LoadMode::strict,
                                              std::vector<RecordIssue>* skipped = nullptr);

std::vector<ReactionPost> load_reaction_feed(const std::filesystem::path& path, LoadMode mode = LoadMode::strict,
                                             std::vector<RecordIssue>* skipped = nullptr);

/// Serializes posts in the wrapped-array shape, one post per line.
std::string write_reaction_feed(std::span<const ReactionPost> posts);

// --- distant labels --------------------------------------------------------

enum class TiePolicy {
  first_slot,  // earliest slot in love, haha, wow, sad, angry order wins
  discard,     // tied maxima leave the post unlabeled
};

struct LabelOptions {
  TiePolicy ties = TiePolicy::first_slot;
  /// Sum raw counts per canonical emotion (love + haha -> joy) before taking
  /// the argmax. Off by default: the argmax runs over raw slots.
  bool sum_before_argmax = false;
};

/// Label of the strongest meaningful reaction, ignoring total, like and
/// thankful. nullopt when every meaningful count is zero.
std::optional<Emotion> assign_label(const ReactionPost& post, const LabelOptions& opts = {});

/// Shannon entropy (nats) of the normalized love/haha/wow/sad/angry counts;
/// nullopt when all five are zero.
std::optional<double> reaction_entropy(const ReactionPost& post);

/// Keeps posts whose reaction entropy is at most `max_entropy`. Posts without
/// any meaningful reaction are always removed.
std::vector<ReactionPost> entropy_filter(std::span<const ReactionPost> posts, double max_entropy);

/// Labels a feed, dropping unlabeled posts and posts with blank messages.
std::vector<LabeledDoc> label_feed(std::span<const ReactionPost> posts, std::string_view source,
                                   const LabelOptions& opts = {});

// --- canonical corpus TSV ---------------------------------------------------

/// Parses `label<TAB>source<TAB>text` lines. Line numbers in errors are 1-based.
/// Blank lines are ignored; a trailing CR is stripped.
std::vector<LabeledDoc> parse_canonical_tsv(std::string_view content, LoadMode mode = LoadMode::strict,
                                            std::vector<RecordIssue>* skipped = nullptr);

std::vector<LabeledDoc> load_canonical_tsv(const std::filesystem::path& path, LoadMode mode = LoadMode::strict,
                                           std::vector<RecordIssue>* skipped = nullptr);

/// Writes one LF-terminated line per document. Tabs, CR and LF inside text or
/// source are replaced by spaces.
std::string write_canonical_tsv(std::span<const LabeledDoc> docs);

// --- benchmark label schemes -----------------------------------------------

/// Affective Text headline scores in (anger, disgust, fear, joy, sadness,
/// surprise) order, each 0..100.
using AffectiveScores = std::array<int, 6>;

inline constexpr int kDefaultAffectiveThreshold = 50;

/// Coarse single label for a headline: disgust folds into anger via max, fear
/// is dropped, and the top mapped score must reach `threshold`. Throws
/// DataError for scores or threshold outside [0, 100].
std::optional<Emotion> map_affective_scores(const AffectiveScores& scores,
                                            int threshold = kDefaultAffectiveThreshold);

struct FairyTaleRecord {
  std::string sentence;
  std::vector<std::string> annotations;
};

/// Keeps sentences whose annotators all agree once angry/disgusted are merged
/// and whose agreed label is not dropped.
std::vector<LabeledDoc> load_fairy_tales(std::span<const FairyTaleRecord> records, LoadMode mode = LoadMode::strict,
                                         std::vector<RecordIssue>* skipped = nullptr);

/// Raw benchmark rows as written by the converter scripts, one per line:
///   facebook, isear:  raw_label<TAB>text
///   affective:        anger<TAB>disgust<TAB>fear<TAB>joy<TAB>sadness<TAB>surprise<TAB>text
///   fairy_tales:      label,label,...<TAB>text  (one label per annotator)
/// Rows are mapped through the scheme; dropped or unlabeled rows are left
/// out. Unknown labels and malformed rows are record errors (1-based lines).
std::vector<LabeledDoc> parse_benchmark_tsv(std::string_view content, Scheme scheme, std::string_view source,
                                            int affective_threshold = kDefaultAffectiveThreshold,
                                            LoadMode mode = LoadMode::strict,
                                            std::vector<RecordIssue>* skipped = nullptr);

// --- synthetic corpora -----------------------------------------------------

struct SynthSpec {
  std::size_t n_docs = 2000;
  std::size_t vocab_per_class = 50;
  double noise_rate = 0.05;   // fraction of tokens drawn from other classes
  double label_noise = 0.0;   // fraction of docs whose label is redrawn uniformly
  std::size_t min_tokens = 8;
  std::size_t max_tokens = 16;
  std::uint64_t seed = 1;
  std::string source = "synthetic";

  bool operator==(const SynthSpec&) const = default;
};

/// Planted-signal corpus: each document's tokens come from its class's own
/// vocabulary partition, with `noise_rate` of tokens taken from the other
/// partitions. Labels are balanced over the four emotions (±1 document) and
/// the output is a pure function of the spec.
std::vector<LabeledDoc> synth_corpus(const SynthSpec& spec);

std::vector<LabeledDoc> synth_corpus(std::size_t n_docs, std::size_t vocab_per_class, double noise_rate,
                                     std::uint64_t seed);

/// The pseudo-word vocabulary of one emotion's partition.
std::vector<std::string> synth_vocabulary(Emotion e, std::size_t vocab_per_class);

}  // namespace emodist
