#include "emodist/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <nlohmann/json.hpp>

#include "emodist/io.hpp"
#include "emodist/text.hpp"

namespace emodist {
namespace {

using nlohmann::json;

Emotion facebook_target(Slot s) {
  switch (s) {
    case Slot::love:
    case Slot::haha:
      return Emotion::joy;
    case Slot::wow:
      return Emotion::surprise;
    case Slot::sad:
      return Emotion::sadness;
    default:
      return Emotion::anger;
  }
}

// Either records the issue (tolerant) or throws (strict).
void reject(LoadMode mode, std::size_t record, std::string reason, std::vector<RecordIssue>* skipped) {
  if (mode == LoadMode::strict) throw RecordError(record, reason);
  if (skipped != nullptr) skipped->push_back({record, std::move(reason)});
}

ReactionPost post_from_json(const json& obj) {
  if (!obj.is_object()) throw std::invalid_argument("expected an object");
  ReactionPost post;
  const auto time = obj.find("created_time");
  if (time == obj.end() || !time->is_string()) throw std::invalid_argument("missing string 'created_time'");
  post.created_time = time->get<std::string>();
  const auto message = obj.find("message");
  if (message == obj.end() || !message->is_string()) throw std::invalid_argument("missing string 'message'");
  post.message = message->get<std::string>();
  const auto reactions = obj.find("reactions");
  if (reactions == obj.end() || !reactions->is_array()) throw std::invalid_argument("missing array 'reactions'");
  if (reactions->size() != kNumSlots) {
    throw std::invalid_argument("reactions must have 8 counts, got " + std::to_string(reactions->size()));
  }
  for (std::size_t i = 0; i < kNumSlots; ++i) {
    const json& v = (*reactions)[i];
    if (v.is_number_unsigned()) {
      post.reactions[i] = static_cast<std::int64_t>(v.get<std::uint64_t>());
    } else if (v.is_number_integer()) {
      post.reactions[i] = v.get<std::int64_t>();
    } else {
      throw std::invalid_argument("reaction count " + std::to_string(i) + " is not an integer");
    }
    if (post.reactions[i] < 0) throw std::invalid_argument("negative reaction count at slot " + std::to_string(i));
  }
  return post;
}

}  // namespace

std::vector<ReactionPost> parse_reaction_feed(std::string_view text, LoadMode mode,
                                              std::vector<RecordIssue>* skipped) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("malformed reaction feed: " + std::string(e.what()), e.byte);
  }
  if (!doc.is_array()) throw ParseError("reaction feed must be a JSON array", 0);

  std::vector<ReactionPost> posts;
  posts.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json* obj = &doc[i];
    if (obj->is_array()) {
      if (obj->size() != 1) {
        reject(mode, i, "wrapped record must hold exactly one object", skipped);
        continue;
      }
      obj = &(*obj)[0];
    }
    try {
      posts.push_back(post_from_json(*obj));
    } catch (const std::invalid_argument& e) {
      reject(mode, i, e.what(), skipped);
    }
  }
  return posts;
}

std::vector<ReactionPost> load_reaction_feed(const std::filesystem::path& path, LoadMode mode,
                                             std::vector<RecordIssue>* skipped) {
  return parse_reaction_feed(read_file(path), mode, skipped);
}

std::string write_reaction_feed(std::span<const ReactionPost> posts) {
  if (posts.empty()) return "[]\n";
  std::string out = "[\n";
  for (std::size_t i = 0; i < posts.size(); ++i) {
    const auto& p = posts[i];
    out += " [{\"created_time\": ";
    out += json(p.created_time).dump();
    out += ", \"message\": ";
    out += json(p.message).dump();
    out += ", \"reactions\": [";
    for (std::size_t k = 0; k < kNumSlots; ++k) {
      if (k > 0) out += ", ";
      out += std::to_string(p.reactions[k]);
    }
    out += "]}]";
    out += i + 1 < posts.size() ? ",\n" : "\n";
  }
  out += "]\n";
  return out;
}

std::optional<Emotion> assign_label(const ReactionPost& post, const LabelOptions& opts) {
  if (opts.sum_before_argmax) {
    std::array<std::int64_t, kNumEmotions> sums{};
    for (Slot s : kMeaningfulSlots) sums[ordinal(facebook_target(s))] += post.count(s);
    std::size_t best = 0;
    for (std::size_t e = 1; e < kNumEmotions; ++e) {
      if (sums[e] > sums[best]) best = e;
    }
    if (sums[best] == 0) return std::nullopt;
    if (opts.ties == TiePolicy::discard) {
      for (std::size_t e = 0; e < kNumEmotions; ++e) {
        if (e != best && sums[e] == sums[best]) return std::nullopt;
      }
    }
    return kEmotions[best];
  }

  Slot best = kMeaningfulSlots[0];
  for (Slot s : kMeaningfulSlots) {
    if (post.count(s) > post.count(best)) best = s;
  }
  if (post.count(best) == 0) return std::nullopt;
  if (opts.ties == TiePolicy::discard) {
    for (Slot s : kMeaningfulSlots) {
      if (s != best && post.count(s) == post.count(best)) return std::nullopt;
    }
  }
  return facebook_target(best);
}

std::optional<double> reaction_entropy(const ReactionPost& post) {
  double total = 0.0;
  for (Slot s : kMeaningfulSlots) total += static_cast<double>(post.count(s));
  if (total <= 0.0) return std::nullopt;
  double h = 0.0;
  for (Slot s : kMeaningfulSlots) {
    const auto c = post.count(s);
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  return h;
}

std::vector<ReactionPost> entropy_filter(std::span<const ReactionPost> posts, double max_entropy) {
  std::vector<ReactionPost> kept;
  for (const auto& post : posts) {
    const auto h = reaction_entropy(post);
    if (h && *h <= max_entropy) kept.push_back(post);
  }
  return kept;
}

std::vector<LabeledDoc> label_feed(std::span<const ReactionPost> posts, std::string_view source,
                                   const LabelOptions& opts) {
  std::vector<LabeledDoc> docs;
  for (const auto& post : posts) {
    const auto label = assign_label(post, opts);
    if (!label || trim(post.message).empty()) continue;
    docs.push_back({post.message, *label, std::string(source)});
  }
  return docs;
}

std::vector<LabeledDoc> parse_canonical_tsv(std::string_view content, LoadMode mode,
                                            std::vector<RecordIssue>* skipped) {
  std::vector<LabeledDoc> docs;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;

    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string_view::npos ? tab1 : line.find('\t', tab1 + 1);
    if (tab2 == std::string_view::npos) {
      reject(mode, line_no, "expected 3 tab-separated fields", skipped);
      continue;
    }
    const auto label_field = line.substr(0, tab1);
    const auto label = parse_emotion(label_field);
    if (!label) {
      reject(mode, line_no, "unknown canonical label '" + std::string(label_field) + "'", skipped);
      continue;
    }
    const auto source = line.substr(tab1 + 1, tab2 - tab1 - 1);
    const auto text = line.substr(tab2 + 1);
    if (trim(text).empty()) {
      reject(mode, line_no, "empty text", skipped);
      continue;
    }
    docs.push_back({std::string(text), *label, std::string(source)});
  }
  return docs;
}

std::vector<LabeledDoc> load_canonical_tsv(const std::filesystem::path& path, LoadMode mode,
                                           std::vector<RecordIssue>* skipped) {
  return parse_canonical_tsv(read_file(path), mode, skipped);
}

std::string write_canonical_tsv(std::span<const LabeledDoc> docs) {
  auto clean = [](std::string_view s) {
    std::string out(s);
    for (char& c : out) {
      if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    }
    return out;
  };
  std::string out;
  for (const auto& doc : docs) {
    out += to_string(doc.label);
    out += '\t';
    out += clean(doc.source);
    out += '\t';
    out += clean(doc.text);
    out += '\n';
  }
  return out;
}

std::optional<Emotion> map_affective_scores(const AffectiveScores& scores, int threshold) {
  if (threshold < 0 || threshold > 100) throw DataError("affective threshold must be in [0, 100]");
  for (int s : scores) {
    if (s < 0 || s > 100) throw DataError("affective score " + std::to_string(s) + " outside [0, 100]");
  }
  const auto& [anger, disgust, fear, joy, sadness, surprise] = scores;
  (void)fear;
  const std::array<int, kNumEmotions> mapped = {std::max(anger, disgust), joy, sadness, surprise};
  std::size_t best = 0;
  for (std::size_t e = 1; e < kNumEmotions; ++e) {
    if (mapped[e] > mapped[best]) best = e;
  }
  if (mapped[best] < threshold || mapped[best] == 0) return std::nullopt;
  return kEmotions[best];
}

std::vector<LabeledDoc> parse_benchmark_tsv(std::string_view content, Scheme scheme, std::string_view source,
                                            int affective_threshold, LoadMode mode, std::vector<RecordIssue>* skipped) {
  if (affective_threshold < 0 || affective_threshold > 100) throw DataError("affective threshold must be in [0, 100]");
  const std::size_t n_labels = scheme == Scheme::affective ? 6 : 1;
  std::vector<LabeledDoc> docs;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (fields.size() < n_labels) {
      const auto tab = line.find('\t', start);
      if (tab == std::string_view::npos) break;
      fields.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    if (fields.size() < n_labels) {
      reject(mode, line_no, "expected " + std::to_string(n_labels + 1) + " tab-separated fields", skipped);
      continue;
    }
    const auto text = line.substr(start);
    if (trim(text).empty()) {
      reject(mode, line_no, "empty text", skipped);
      continue;
    }

    std::optional<Emotion> label;
    try {
      if (scheme == Scheme::affective) {
        AffectiveScores scores{};
        for (std::size_t k = 0; k < 6; ++k) {
          const auto f = trim(fields[k]);
          const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), scores[k]);
          if (ec != std::errc() || ptr != f.data() + f.size()) {
            throw DataError("bad score '" + std::string(fields[k]) + "'");
          }
        }
        label = map_affective_scores(scores, affective_threshold);
      } else if (scheme == Scheme::fairy_tales) {
        FairyTaleRecord rec{std::string(text), {}};
        std::size_t from = 0;
        const auto list = fields[0];
        while (from <= list.size()) {
          auto comma = list.find(',', from);
          if (comma == std::string_view::npos) comma = list.size();
          rec.annotations.emplace_back(list.substr(from, comma - from));
          from = comma + 1;
        }
        const auto kept = load_fairy_tales(std::span<const FairyTaleRecord>(&rec, 1));
        if (!kept.empty()) label = kept.front().label;
      } else {
        label = map_source_label(scheme, trim(fields[0]));
      }
    } catch (const RecordError& e) {
      reject(mode, line_no, e.reason(), skipped);
      continue;
    } catch (const DataError& e) {
      reject(mode, line_no, e.what(), skipped);
      continue;
    }
    if (label) docs.push_back({std::string(text), *label, std::string(source)});
  }
  return docs;
}

std::vector<LabeledDoc> load_fairy_tales(std::span<const FairyTaleRecord> records, LoadMode mode,
                                         std::vector<RecordIssue>* skipped) {
  std::vector<LabeledDoc> docs;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.annotations.empty()) {
      reject(mode, i, "no annotator labels", skipped);
      continue;
    }
    std::vector<std::optional<Emotion>> mapped;
    try {
      for (const auto& raw : rec.annotations) mapped.push_back(map_source_label(Scheme::fairy_tales, trim(raw)));
    } catch (const DataError& e) {
      reject(mode, i, e.what(), skipped);
      continue;
    }
    // The mapping is injective apart from the angry/disgusted merge and the
    // dropped fearful class, so agreement after merging is agreement of
    // mapped values.
    const bool agree = std::all_of(mapped.begin(), mapped.end(), [&](const auto& m) { return m == mapped[0]; });
    if (!agree || !mapped[0] || trim(rec.sentence).empty()) continue;
    docs.push_back({rec.sentence, *mapped[0], "fairy_tales"});
  }
  return docs;
}

}  // namespace emodist
