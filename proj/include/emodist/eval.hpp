#pragma once

#include <array>
#include <cstddef>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "emodist/emotion.hpp"

namespace emodist {

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;    // gold count
  std::size_t predicted = 0;  // predicted count
  /// Zero denominators: the value is reported as 0.
  bool precision_undefined = false;
  bool recall_undefined = false;

  bool operator==(const ClassScores&) const = default;
};

struct EvalReport {
  /// confusion[gold][predicted]
  std::array<std::array<std::size_t, kNumEmotions>, kNumEmotions> confusion{};
  std::array<ClassScores, kNumEmotions> per_class{};
  /// Classes occurring in gold or predictions; only these get report rows.
  std::array<bool, kNumEmotions> present{};
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
  double accuracy = 0.0;
  std::size_t n = 0;

  bool operator==(const EvalReport&) const = default;
};

/// Throws DataError for empty or mismatched inputs.
EvalReport evaluate(std::span<const Emotion> gold, std::span<const Emotion> predicted);

/// Recomputes every score from a confusion matrix.
EvalReport report_from_confusion(const std::array<std::array<std::size_t, kNumEmotions>, kNumEmotions>& confusion);

enum class ReportFormat { tsv, json, pretty };

std::optional<ReportFormat> parse_report_format(std::string_view name) noexcept;

/// tsv: `class<TAB>precision<TAB>recall<TAB>f1` header, one row per present
/// class, then a `micro` row; three decimals. json: full report. pretty:
/// aligned table.
std::string render_report(const EvalReport& report, ReportFormat format);

nlohmann::json to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

}  // namespace emodist
