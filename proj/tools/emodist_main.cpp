#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "emodist/corpus.hpp"
#include "emodist/embeddings.hpp"
#include "emodist/error.hpp"
#include "emodist/eval.hpp"
#include "emodist/experiments.hpp"
#include "emodist/io.hpp"
#include "emodist/lexicon.hpp"
#include "emodist/text.hpp"

namespace fs = std::filesystem;
using namespace emodist;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::string preset;
  std::string feeds_dir = ".";
  std::string embeddings;
  std::optional<double> max_entropy;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "tsv";
  bool tolerant = false;
  bool discard_ties = false;
  bool sum_before_argmax = false;
};

ReportFormat report_format(const Common& c) {
  auto f = parse_report_format(c.format);
  if (!f) throw ConfigError("--format must be tsv, json or pretty");
  return *f;
}

LabelOptions label_options(const Common& c) {
  LabelOptions opts;
  opts.ties = c.discard_ties ? TiePolicy::discard : TiePolicy::first_slot;
  opts.sum_before_argmax = c.sum_before_argmax;
  return opts;
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty() || c.out == "-") {
    std::cout << text;
  } else {
    write_file(c.out, text);
  }
}

SourceSpec source_from_path(const std::string& arg) {
  SourceSpec s;
  std::string path = arg;
  if (auto eq = arg.find('='); eq != std::string::npos) {
    s.name = arg.substr(0, eq);
    path = arg.substr(eq + 1);
  }
  s.path = path;
  if (s.name.empty()) s.name = s.path.stem().string();
  s.kind = s.path.extension() == ".json" ? SourceKind::reaction_feed : SourceKind::canonical_tsv;
  return s;
}

/// Config from --config or --preset, with command-line overrides applied.
ExperimentConfig build_config(const Common& c, const std::vector<std::string>& evals, double holdout,
                              bool need_eval) {
  if (!c.config.empty() && !c.preset.empty()) throw ConfigError("--config and --preset are mutually exclusive");
  ExperimentConfig cfg;
  if (!c.config.empty()) {
    cfg = load_experiment_config(c.config);
  } else if (!c.preset.empty()) {
    cfg = preset_config(c.preset, c.feeds_dir, c.embeddings);
    if (c.embeddings.empty()) {
      std::cerr << "warning: no --embeddings table given; embedding features disabled\n";
    }
  } else {
    throw ConfigError("one of --config or --preset is required");
  }
  for (const auto& e : evals) cfg.eval_datasets.push_back(source_from_path(e));
  if (holdout >= 0.0) cfg.holdout_fraction = holdout;
  if (need_eval && !c.preset.empty() && cfg.eval_datasets.empty() && cfg.holdout_fraction == 0.0) {
    cfg.holdout_fraction = 0.2;
  }
  if (c.max_entropy) cfg.max_entropy = c.max_entropy;
  if (c.seed) {
    cfg.seed = *c.seed;
    cfg.train.seed = *c.seed;
  }
  if (!c.out.empty()) cfg.output_dir = c.out;
  if (c.discard_ties) cfg.labeling.ties = TiePolicy::discard;
  if (c.sum_before_argmax) cfg.labeling.sum_before_argmax = true;
  return cfg;
}

void report_skipped(const std::string& where, const std::vector<RecordIssue>& skipped) {
  for (const auto& s : skipped) std::cerr << where << ": skipped record " << s.record << ": " << s.reason << "\n";
}

std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string render_distributions(const std::vector<SourceDistribution>& dists, ReportFormat format) {
  if (format == ReportFormat::json) {
    json arr = json::array();
    for (const auto& d : dists) arr.push_back(to_json(d));
    return arr.dump(2) + "\n";
  }
  std::string out;
  if (format == ReportFormat::tsv) {
    out = "source";
    for (auto e : kEmotions) out += "\t" + std::string(to_string(e));
    out += "\tlabeled\tunlabeled\n";
    for (const auto& d : dists) {
      out += d.name;
      for (auto e : kEmotions) out += "\t" + fmt3(d.proportions[ordinal(e)]);
      out += "\t" + std::to_string(d.labeled()) + "\t" + std::to_string(d.unlabeled) + "\n";
    }
    return out;
  }
  char line[256];
  std::snprintf(line, sizeof line, "%-20s %8s %8s %8s %8s %9s %9s\n", "source", "anger", "joy", "sadness",
                "surprise", "labeled", "unlabeled");
  out += line;
  for (const auto& d : dists) {
    std::snprintf(line, sizeof line, "%-20s %8.3f %8.3f %8.3f %8.3f %9zu %9zu\n", d.name.c_str(), d.proportions[0],
                  d.proportions[1], d.proportions[2], d.proportions[3], d.labeled(), d.unlabeled);
    out += line;
  }
  return out;
}

std::vector<std::vector<std::string>> read_sentences(const fs::path& path, bool lowercase) {
  std::vector<std::vector<std::string>> sentences;
  if (path.extension() == ".tsv") {
    for (const auto& doc : load_canonical_tsv(path)) sentences.push_back(tokenize(doc.text, lowercase));
    return sentences;
  }
  const auto text = read_file(path);
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    auto tokens = tokenize(std::string_view(text).substr(start, end - start), lowercase);
    if (!tokens.empty()) sentences.push_back(std::move(tokens));
    start = end + 1;
  }
  return sentences;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Emotion classification with distant supervision from reaction counts"};
  app.require_subcommand(1);
  Common c;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--format", c.format, "Output format: tsv, json or pretty")
        ->check(CLI::IsMember({"tsv", "json", "pretty"}));
    cmd->add_option("--out", c.out, "Output file or directory");
  };
  auto add_labeling = [&](CLI::App* cmd) {
    cmd->add_option("--max-entropy", c.max_entropy, "Drop posts whose reaction entropy (nats) exceeds this");
    cmd->add_flag("--discard-ties", c.discard_ties, "Leave posts with tied top reactions unlabeled");
    cmd->add_flag("--sum-before-argmax", c.sum_before_argmax, "Sum reactions per emotion before the argmax");
  };
  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", c.config, "Experiment config (JSON)");
    cmd->add_option("--preset", c.preset, "Named source preset")->check(CLI::IsMember({"b-m", "ft-m", "ise-m"}));
    cmd->add_option("--feeds", c.feeds_dir, "Directory holding <Page>.json feeds for presets");
    cmd->add_option("--embeddings", c.embeddings, "Embedding table for presets");
    cmd->add_option("--seed", c.seed, "Override the config seeds");
  };

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate reaction feeds and write them in normalized form");
  std::vector<std::string> ingest_files;
  ingest->add_option("feeds", ingest_files, "Reaction feed JSON files")->required()->check(CLI::ExistingFile);
  ingest->add_flag("--tolerant", c.tolerant, "Skip invalid records instead of failing");
  ingest->add_option("--max-entropy", c.max_entropy, "Drop posts whose reaction entropy (nats) exceeds this");
  add_common(ingest);
  ingest->callback([&] {
    std::vector<ReactionPost> all;
    for (const auto& f : ingest_files) {
      std::vector<RecordIssue> skipped;
      auto posts = load_reaction_feed(f, c.tolerant ? LoadMode::tolerant : LoadMode::strict, &skipped);
      report_skipped(f, skipped);
      if (c.max_entropy) posts = entropy_filter(posts, *c.max_entropy);
      all.insert(all.end(), posts.begin(), posts.end());
    }
    emit(c, write_reaction_feed(all));
  });

  // label
  auto* label = app.add_subcommand("label", "Label reaction feeds or converted benchmarks as a canonical TSV corpus");
  std::vector<std::string> label_files;
  std::string label_scheme = "facebook";
  int affective_threshold = kDefaultAffectiveThreshold;
  label->add_option("inputs", label_files, "Reaction feeds, or benchmark rows for --scheme, optionally as name=path")
      ->required();
  label->add_option("--scheme", label_scheme, "Input label scheme")
      ->check(CLI::IsMember({"facebook", "affective", "fairy_tales", "isear"}));
  label->add_option("--threshold", affective_threshold, "Smallest winning score for affective headlines (0-100)")
      ->check(CLI::Range(0, 100));
  label->add_flag("--tolerant", c.tolerant, "Skip invalid records instead of failing");
  add_labeling(label);
  add_common(label);
  label->callback([&] {
    const auto mode = c.tolerant ? LoadMode::tolerant : LoadMode::strict;
    const auto scheme = *parse_scheme(label_scheme);
    std::vector<LabeledDoc> docs;
    for (const auto& arg : label_files) {
      auto source = source_from_path(arg);
      std::vector<RecordIssue> skipped;
      std::vector<LabeledDoc> labeled;
      if (scheme == Scheme::facebook && source.kind == SourceKind::reaction_feed) {
        auto posts = load_reaction_feed(source.path, mode, &skipped);
        if (c.max_entropy) posts = entropy_filter(posts, *c.max_entropy);
        labeled = label_feed(posts, source.name, label_options(c));
      } else {
        if (arg.find('=') == std::string::npos) source.name = label_scheme;
        labeled = parse_benchmark_tsv(read_file(source.path), scheme, source.name, affective_threshold, mode, &skipped);
      }
      report_skipped(source.path.string(), skipped);
      docs.insert(docs.end(), labeled.begin(), labeled.end());
    }
    emit(c, write_canonical_tsv(docs));
  });

  // distribution
  auto* dist = app.add_subcommand("distribution", "Emotion distribution per source");
  std::vector<std::string> dist_files;
  dist->add_option("sources", dist_files, "Feeds or TSV corpora, optionally as name=path");
  add_config(dist);
  add_labeling(dist);
  add_common(dist);
  dist->callback([&] {
    std::vector<SourceSpec> sources;
    LabelOptions labeling = label_options(c);
    std::optional<double> max_entropy = c.max_entropy;
    if (!c.config.empty() || !c.preset.empty()) {
      const auto cfg = build_config(c, {}, -1.0, false);
      sources = cfg.train_sources;
      labeling = cfg.labeling;
      max_entropy = cfg.max_entropy;
    }
    for (const auto& f : dist_files) sources.push_back(source_from_path(f));
    if (sources.empty()) throw ConfigError("no sources given");
    std::vector<SourceDistribution> dists;
    for (const auto& s : sources) dists.push_back(source_distribution(s, labeling, max_entropy));
    emit(c, render_distributions(dists, report_format(c)));
  });

  // train
  auto* train = app.add_subcommand("train", "Run an experiment: fit features and classifier, evaluate, save");
  std::vector<std::string> train_evals;
  double train_holdout = -1.0;
  train->add_option("--eval", train_evals, "Evaluation dataset as name=path (repeatable)");
  train->add_option("--holdout", train_holdout, "Fraction of training documents held out for evaluation");
  add_config(train);
  add_labeling(train);
  train->add_option("--format", c.format, "Report format: tsv, json or pretty")
      ->check(CLI::IsMember({"tsv", "json", "pretty"}));
  train->add_option("--out", c.out, "Output directory");
  train->callback([&] {
    const auto cfg = build_config(c, train_evals, train_holdout, true);
    const auto record = run(cfg);
    const auto format = report_format(c);
    if (format == ReportFormat::json) {
      std::cout << to_json(record).dump(2) << "\n";
      return;
    }
    for (const auto& r : record.reports) {
      std::cout << "# " << r.name << "\n" << render_report(r.report, format);
    }
  });

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a saved model on a dataset");
  std::string model_dir;
  std::string eval_data;
  eval->add_option("--model", model_dir, "Directory written by train")->required()->check(CLI::ExistingDirectory);
  eval->add_option("dataset", eval_data, "Canonical TSV or reaction feed, optionally as name=path")->required();
  add_labeling(eval);
  add_common(eval);
  eval->callback([&] {
    const auto pipeline = load_pipeline(model_dir);
    const auto docs = load_source(source_from_path(eval_data), label_options(c), c.max_entropy);
    emit(c, render_report(evaluate_pipeline(pipeline, docs), report_format(c)));
  });

  // search
  auto* search = app.add_subcommand("search", "Rank training-source subsets by dev micro-F1");
  std::vector<std::string> search_files;
  std::string dev_path;
  std::size_t k_max = 0;
  search->add_option("sources", search_files, "Candidate sources, optionally as name=path");
  search->add_option("--dev", dev_path, "Development dataset, optionally as name=path");
  search->add_option("--k-max", k_max, "Largest subset size (default: all candidates)");
  add_config(search);
  add_labeling(search);
  add_common(search);
  search->callback([&] {
    ExperimentConfig cfg;
    if (!c.config.empty() || !c.preset.empty()) {
      cfg = build_config(c, {}, -1.0, false);
    } else {
      if (c.max_entropy) cfg.max_entropy = c.max_entropy;
      cfg.labeling = label_options(c);
      if (c.seed) cfg.train.seed = *c.seed;
    }
    std::vector<SourceSpec> candidates = cfg.train_sources;
    for (const auto& f : search_files) candidates.push_back(source_from_path(f));
    SourceSpec dev;
    if (!dev_path.empty()) {
      dev = source_from_path(dev_path);
    } else if (!cfg.eval_datasets.empty()) {
      dev = cfg.eval_datasets.front();
    } else {
      throw ConfigError("search needs --dev or an evaluation dataset in the config");
    }
    const auto results = page_search(candidates, dev, k_max == 0 ? candidates.size() : k_max, cfg);
    std::string out;
    const auto format = report_format(c);
    if (format == ReportFormat::json) {
      json arr = json::array();
      for (const auto& r : results) arr.push_back({{"sources", r.sources}, {"micro_f1", r.micro_f1}});
      out = arr.dump(2) + "\n";
    } else {
      out = format == ReportFormat::tsv ? "rank\tmicro_f1\tsources\n" : "";
      for (std::size_t i = 0; i < results.size(); ++i) {
        std::string names;
        for (const auto& n : results[i].sources) names += (names.empty() ? "" : ",") + n;
        char line[64];
        std::snprintf(line, sizeof line, format == ReportFormat::tsv ? "%zu\t%.3f\t" : "%3zu  %.3f  ", i + 1,
                      results[i].micro_f1);
        out += line + names + "\n";
      }
    }
    emit(c, out);
  });

  // embed
  auto* embed = app.add_subcommand("embed", "Train or retrofit word embeddings");
  embed->require_subcommand(1);
  auto* embed_train = embed->add_subcommand("train", "Skip-gram training on a corpus");
  SkipGramConfig sg;
  std::string corpus_path;
  bool keep_case = false;
  embed_train->add_option("corpus", corpus_path, "Canonical TSV (.tsv) or plain text, one sentence per line")
      ->required()
      ->check(CLI::ExistingFile);
  embed_train->add_option("--window", sg.window, "Maximum context window");
  embed_train->add_option("--lr", sg.lr, "Initial learning rate");
  embed_train->add_option("--min-lr", sg.min_lr, "Final learning rate");
  embed_train->add_option("--dim", sg.dim, "Vector dimensionality");
  embed_train->add_option("--min-count", sg.min_count, "Minimum word count");
  embed_train->add_option("--negatives", sg.negatives, "Negative samples per pair");
  embed_train->add_option("--epochs", sg.epochs, "Passes over the corpus");
  embed_train->add_option("--threads", sg.threads, "Worker threads (>1 is not reproducible)");
  embed_train->add_option("--seed", sg.seed, "Random seed");
  embed_train->add_flag("--keep-case", keep_case, "Do not lowercase tokens");
  embed_train->add_option("--out", c.out, "Output vector file");
  embed_train->callback([&] {
    sg.validate();
    const auto table = train_skipgram(read_sentences(corpus_path, !keep_case), sg);
    emit(c, write_vectors(table));
  });

  auto* embed_retro = embed->add_subcommand("retrofit", "Pull vectors of words sharing a lexicon emotion together");
  std::string vectors_path;
  std::string lexicon_path;
  std::size_t iterations = 10;
  std::size_t max_degree = kDefaultMaxDegree;
  embed_retro->add_option("vectors", vectors_path, "Input vector file")->required()->check(CLI::ExistingFile);
  embed_retro->add_option("--lexicon", lexicon_path, "Emotion lexicon TSV")->required()->check(CLI::ExistingFile);
  embed_retro->add_option("--iters", iterations, "Update sweeps");
  embed_retro->add_option("--max-degree", max_degree, "Neighbours proposed per word");
  embed_retro->add_option("--out", c.out, "Output vector file");
  embed_retro->callback([&] {
    std::vector<std::string> warnings;
    const auto table = load_vectors(vectors_path, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    const auto graph = build_emotion_graph(Lexicon::load(lexicon_path), table, max_degree);
    emit(c, write_vectors(retrofit(table, graph, iterations)));
  });

  // synth
  auto* synth = app.add_subcommand("synth", "Write a planted-signal corpus as canonical TSV");
  SynthSpec spec;
  synth->add_option("--n", spec.n_docs, "Documents");
  synth->add_option("--vocab", spec.vocab_per_class, "Pseudo-words per class");
  synth->add_option("--noise", spec.noise_rate, "Fraction of tokens from other classes");
  synth->add_option("--label-noise", spec.label_noise, "Fraction of labels redrawn uniformly");
  synth->add_option("--min-tokens", spec.min_tokens, "Shortest document");
  synth->add_option("--max-tokens", spec.max_tokens, "Longest document");
  synth->add_option("--seed", spec.seed, "Random seed");
  synth->add_option("--source", spec.source, "Source column value");
  synth->add_option("--out", c.out, "Output TSV file");
  synth->callback([&] {
    if (spec.n_docs == 0 || spec.vocab_per_class == 0) throw ConfigError("--n and --vocab must be positive");
    if (spec.min_tokens == 0 || spec.min_tokens > spec.max_tokens) {
      throw ConfigError("need 0 < --min-tokens <= --max-tokens");
    }
    emit(c, write_canonical_tsv(synth_corpus(spec)));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
