#include "emodist/eval.hpp"

#include <cstdio>

#include "emodist/error.hpp"

namespace emodist {
namespace {

using nlohmann::json;

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

double ratio(std::size_t num, std::size_t den, bool& undefined) {
  undefined = den == 0;
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

}  // namespace

EvalReport report_from_confusion(const std::array<std::array<std::size_t, kNumEmotions>, kNumEmotions>& confusion) {
  EvalReport r;
  r.confusion = confusion;
  std::size_t tp_total = 0;
  for (std::size_t g = 0; g < kNumEmotions; ++g) {
    for (std::size_t p = 0; p < kNumEmotions; ++p) {
      r.n += confusion[g][p];
      r.per_class[g].support += confusion[g][p];
      r.per_class[p].predicted += confusion[g][p];
    }
    tp_total += confusion[g][g];
  }
  for (std::size_t c = 0; c < kNumEmotions; ++c) {
    auto& s = r.per_class[c];
    const std::size_t tp = confusion[c][c];
    s.precision = ratio(tp, s.predicted, s.precision_undefined);
    s.recall = ratio(tp, s.support, s.recall_undefined);
    s.f1 = harmonic(s.precision, s.recall);
    r.present[c] = s.support > 0 || s.predicted > 0;
  }
  std::size_t fp_total = 0;
  std::size_t fn_total = 0;
  for (std::size_t c = 0; c < kNumEmotions; ++c) {
    fp_total += r.per_class[c].predicted - confusion[c][c];
    fn_total += r.per_class[c].support - confusion[c][c];
  }
  bool unused = false;
  r.micro_precision = ratio(tp_total, tp_total + fp_total, unused);
  r.micro_recall = ratio(tp_total, tp_total + fn_total, unused);
  r.micro_f1 = harmonic(r.micro_precision, r.micro_recall);
  r.accuracy = ratio(tp_total, r.n, unused);
  return r;
}

EvalReport evaluate(std::span<const Emotion> gold, std::span<const Emotion> predicted) {
  if (gold.size() != predicted.size()) throw DataError("gold and predicted label counts differ");
  if (gold.empty()) throw DataError("cannot evaluate zero instances");
  std::array<std::array<std::size_t, kNumEmotions>, kNumEmotions> confusion{};
  for (std::size_t i = 0; i < gold.size(); ++i) ++confusion[ordinal(gold[i])][ordinal(predicted[i])];
  return report_from_confusion(confusion);
}

std::optional<ReportFormat> parse_report_format(std::string_view name) noexcept {
  if (name == "tsv") return ReportFormat::tsv;
  if (name == "json") return ReportFormat::json;
  if (name == "pretty") return ReportFormat::pretty;
  return std::nullopt;
}

json to_json(const EvalReport& r) {
  json classes = json::array();
  for (Emotion e : kEmotions) {
    const auto& s = r.per_class[ordinal(e)];
    if (!r.present[ordinal(e)]) continue;
    classes.push_back({{"class", to_string(e)},
                       {"precision", s.precision},
                       {"recall", s.recall},
                       {"f1", s.f1},
                       {"support", s.support},
                       {"predicted", s.predicted},
                       {"precision_undefined", s.precision_undefined},
                       {"recall_undefined", s.recall_undefined}});
  }
  json labels = json::array();
  for (Emotion e : kEmotions) labels.push_back(to_string(e));
  return json{{"format", "emodist.eval_report"},
              {"version", 1},
              {"n", r.n},
              {"labels", labels},
              {"confusion", r.confusion},
              {"classes", classes},
              {"micro", {{"precision", r.micro_precision}, {"recall", r.micro_recall}, {"f1", r.micro_f1}}},
              {"accuracy", r.accuracy}};
}

EvalReport report_from_json(const json& j) {
  try {
    const auto confusion = j.at("confusion").get<std::array<std::array<std::size_t, kNumEmotions>, kNumEmotions>>();
    EvalReport r = report_from_confusion(confusion);
    if (r.n != j.at("n").get<std::size_t>()) throw DataError("report instance count disagrees with its matrix");
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
}

std::string render_report(const EvalReport& r, ReportFormat format) {
  switch (format) {
    case ReportFormat::json:
      return to_json(r).dump(2) + "\n";
    case ReportFormat::tsv: {
      std::string out = "class\tprecision\trecall\tf1\n";
      for (Emotion e : kEmotions) {
        if (!r.present[ordinal(e)]) continue;
        const auto& s = r.per_class[ordinal(e)];
        out += std::string(to_string(e)) + "\t" + fixed3(s.precision) + "\t" + fixed3(s.recall) + "\t" +
               fixed3(s.f1) + "\n";
      }
      out += "micro\t" + fixed3(r.micro_precision) + "\t" + fixed3(r.micro_recall) + "\t" + fixed3(r.micro_f1) + "\n";
      return out;
    }
    case ReportFormat::pretty: {
      char line[128];
      std::string out;
      std::snprintf(line, sizeof(line), "%-10s %9s %9s %9s %8s\n", "class", "precision", "recall", "f1", "support");
      out += line;
      for (Emotion e : kEmotions) {
        if (!r.present[ordinal(e)]) continue;
        const auto& s = r.per_class[ordinal(e)];
        std::snprintf(line, sizeof(line), "%-10s %9.3f %9.3f %9.3f %8zu\n", std::string(to_string(e)).c_str(),
                      s.precision, s.recall, s.f1, s.support);
        out += line;
      }
      std::snprintf(line, sizeof(line), "%-10s %9.3f %9.3f %9.3f %8zu\n", "micro", r.micro_precision, r.micro_recall,
                    r.micro_f1, r.n);
      out += line;
      return out;
    }
  }
  return {};
}

}  // namespace emodist
