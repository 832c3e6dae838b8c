#include <doctest.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <unistd.h>

#include "emodist/error.hpp"
#include "emodist/experiments.hpp"

using namespace emodist;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("emodist-exp-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ignored;
    fs::remove_all(path, ignored);
  }
  fs::path operator/(const std::string& name) const { return path / name; }
};

void write(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ReactionPost post(std::string message, Slot slot, std::int64_t count = 3) {
  ReactionPost p;
  p.created_time = "2017-01-01T00:00:00+0000";
  p.message = std::move(message);
  p.reactions[static_cast<std::size_t>(slot)] = count;
  p.reactions[static_cast<std::size_t>(Slot::total)] = count;
  return p;
}

SourceSpec feed_source(const fs::path& path, std::string name) {
  return {std::move(name), SourceKind::reaction_feed, path, {}};
}

SourceSpec synth_source(std::string name, std::size_t n, std::uint64_t seed, double noise = 0.1) {
  SourceSpec s;
  s.name = std::move(name);
  s.kind = SourceKind::synthetic;
  s.synth.n_docs = n;
  s.synth.vocab_per_class = 20;
  s.synth.noise_rate = noise;
  s.synth.seed = seed;
  s.synth.source = s.name;
  return s;
}

ExperimentConfig synth_config() {
  ExperimentConfig cfg;
  cfg.train_sources = {synth_source("train", 200, 1)};
  cfg.eval_datasets = {synth_source("dev", 80, 2)};
  cfg.features = FeatureConfig::tfidf_only();
  cfg.train.epochs = 5;
  return cfg;
}

}  // namespace

TEST_CASE("config JSON round-trip") {
  auto cfg = synth_config();
  cfg.holdout_fraction = 0.25;
  cfg.seed = 9;
  cfg.max_entropy = 0.8;
  cfg.labeling.ties = TiePolicy::discard;
  cfg.train.C = 0.5;
  cfg.output_dir = "/tmp/out";
  const auto j = to_json(cfg);
  const auto back = experiment_config_from_json(j);
  CHECK(to_json(back) == j);
  CHECK(config_hash(back) == config_hash(cfg));
  CHECK(back.max_entropy == cfg.max_entropy);
  CHECK(back.train_sources == cfg.train_sources);

  auto extra = j;
  extra["colour"] = 1;
  CHECK_THROWS_AS(experiment_config_from_json(extra), ConfigError);
  auto nested = j;
  nested["train_sources"][0]["synthetic"]["vocab"] = 5;
  CHECK_THROWS_AS(experiment_config_from_json(nested), ConfigError);
  auto version = j;
  version["version"] = 99;
  CHECK_THROWS_AS(experiment_config_from_json(version), ConfigError);
  auto no_version = j;
  no_version.erase("version");
  CHECK_THROWS_AS(experiment_config_from_json(no_version), ConfigError);
}

TEST_CASE("config paths resolve against the config file") {
  TempDir dir;
  write(dir / "a.tsv", "joy\ts\thello\n");
  const nlohmann::json j = {{"version", kExperimentConfigVersion},
                            {"train_sources", {{{"name", "a"}, {"path", "a.tsv"}}}},
                            {"eval_datasets", {{{"name", "b"}, {"path", "a.tsv"}}}}};
  write(dir / "cfg.json", j.dump());
  const auto cfg = load_experiment_config(dir / "cfg.json");
  CHECK(cfg.train_sources[0].path == dir / "a.tsv");
  CHECK(cfg.train_sources[0].kind == SourceKind::canonical_tsv);
  CHECK_NOTHROW(cfg.validate());

  CHECK_THROWS_AS(load_experiment_config(dir / "missing.json"), ConfigError);
  write(dir / "bad.json", "{");
  CHECK_THROWS_AS(load_experiment_config(dir / "bad.json"), ConfigError);
}

TEST_CASE("config validation") {
  CHECK_NOTHROW(synth_config().validate());
  auto expect_invalid = [](auto mutate) {
    auto cfg = synth_config();
    mutate(cfg);
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  };
  expect_invalid([](ExperimentConfig& c) { c.train_sources.clear(); });
  expect_invalid([](ExperimentConfig& c) { c.eval_datasets.clear(); });
  expect_invalid([](ExperimentConfig& c) { c.holdout_fraction = 1.0; });
  expect_invalid([](ExperimentConfig& c) { c.train_sources[0].name = "has space"; });
  expect_invalid([](ExperimentConfig& c) { c.eval_datasets.push_back(c.eval_datasets[0]); });
  expect_invalid([](ExperimentConfig& c) {
    c.holdout_fraction = 0.2;
    c.eval_datasets[0].name = "holdout";
  });
  expect_invalid([](ExperimentConfig& c) { c.train_sources[0].synth.n_docs = 0; });
  expect_invalid([](ExperimentConfig& c) { c.train_sources[0].synth.noise_rate = 1.5; });
  expect_invalid([](ExperimentConfig& c) { c.train_sources[0] = {"x", SourceKind::canonical_tsv, "/nonexistent", {}}; });
  expect_invalid([](ExperimentConfig& c) { c.features.lexicon = true; });
  expect_invalid([](ExperimentConfig& c) { c.features.embeddings = true; });
  expect_invalid([](ExperimentConfig& c) { c.embeddings.mode = EmbeddingMode::train; });
  expect_invalid([](ExperimentConfig& c) {
    c.features.embeddings = true;
    c.embeddings.mode = EmbeddingMode::load;
  });
  expect_invalid([](ExperimentConfig& c) {
    c.features.embeddings = true;
    c.embeddings.mode = EmbeddingMode::retrofit;
  });
  expect_invalid([](ExperimentConfig& c) { c.max_entropy = -1.0; });
  expect_invalid([](ExperimentConfig& c) { c.train.C = -1.0; });
  expect_invalid([](ExperimentConfig& c) { c.features.word_range = {3, 2}; });

  auto cfg = synth_config();
  cfg.train_sources[0] = {"x", SourceKind::canonical_tsv, "/nonexistent", {}};
  CHECK_NOTHROW(cfg.validate(false));
}

TEST_CASE("config hash tracks every field") {
  const auto base = synth_config();
  const auto h0 = config_hash(base);
  CHECK(config_hash(synth_config()) == h0);
  std::vector<std::function<void(ExperimentConfig&)>> mutations = {
      [](ExperimentConfig& c) { c.seed = 2; },
      [](ExperimentConfig& c) { c.holdout_fraction = 0.1; },
      [](ExperimentConfig& c) { c.train_sources[0].synth.seed = 5; },
      [](ExperimentConfig& c) { c.train_sources[0].name = "other"; },
      [](ExperimentConfig& c) { c.eval_datasets[0].synth.noise_rate = 0.2; },
      [](ExperimentConfig& c) { c.features.char_ngrams = true; },
      [](ExperimentConfig& c) { c.features.min_freq = 2; },
      [](ExperimentConfig& c) { c.train.C = 2.0; },
      [](ExperimentConfig& c) { c.train.epochs = 6; },
      [](ExperimentConfig& c) { c.embeddings.iterations = 3; },
      [](ExperimentConfig& c) { c.embeddings.skipgram.dim = 7; },
      [](ExperimentConfig& c) { c.lexicon = "lex.tsv"; },
      [](ExperimentConfig& c) { c.negations = "neg.txt"; },
      [](ExperimentConfig& c) { c.stopwords = "stop.txt"; },
      [](ExperimentConfig& c) { c.max_entropy = 1.0; },
      [](ExperimentConfig& c) { c.labeling.sum_before_argmax = true; },
      [](ExperimentConfig& c) { c.labeling.ties = TiePolicy::discard; },
      [](ExperimentConfig& c) { c.output_dir = "out"; },
  };
  std::set<std::uint64_t> seen = {h0};
  for (const auto& m : mutations) {
    auto cfg = base;
    m(cfg);
    CHECK(seen.insert(config_hash(cfg)).second);
  }
}

TEST_CASE("source distributions") {
  TempDir dir;
  const std::vector<ReactionPost> joy = {post("a", Slot::love), post("b", Slot::haha), post("c", Slot::love)};
  write(dir / "joy.json", write_reaction_feed(joy));
  const auto d = source_distribution(feed_source(dir / "joy.json", "joy"));
  CHECK(d.counts == std::array<std::size_t, 4>{0, 3, 0, 0});
  CHECK(d.proportions == std::array<double, 4>{0.0, 1.0, 0.0, 0.0});

  const std::vector<ReactionPost> mixed = {post("a", Slot::love), post("b", Slot::angry), post("c", Slot::like)};
  write(dir / "mixed.json", write_reaction_feed(mixed));
  const auto m = source_distribution(feed_source(dir / "mixed.json", "mixed"));
  CHECK(m.proportions == std::array<double, 4>{0.5, 0.5, 0.0, 0.0});
  CHECK(m.unlabeled == 1);
  CHECK(to_json(m)["unlabeled"] == 1);

  const std::vector<ReactionPost> none = {post("a", Slot::like), post("b", Slot::thankful)};
  write(dir / "none.json", write_reaction_feed(none));
  try {
    source_distribution(feed_source(dir / "none.json", "none"));
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("no labeled posts") != std::string::npos);
  }
  write(dir / "empty.json", "[]");
  CHECK_THROWS_AS(source_distribution(feed_source(dir / "empty.json", "empty")), DataError);

  // An entropy threshold of zero keeps only single-reaction posts.
  auto split = post("d", Slot::sad);
  split.reactions[static_cast<std::size_t>(Slot::wow)] = 3;
  std::vector<ReactionPost> filtered = mixed;
  filtered.push_back(split);
  write(dir / "filtered.json", write_reaction_feed(filtered));
  const auto f = source_distribution(feed_source(dir / "filtered.json", "f"), {}, 0.0);
  CHECK(f.labeled() == 2);
  CHECK(f.unlabeled == 2);

  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto docs = synth_corpus(1 + seed * 7, 5, 0.1, seed);
    const auto dist = distribution_of("s", docs);
    CHECK(std::accumulate(dist.proportions.begin(), dist.proportions.end(), 0.0) == doctest::Approx(1.0));
    CHECK(dist.labeled() == docs.size());
  }
}

TEST_CASE("run is deterministic and writes its outputs") {
  TempDir dir;
  auto cfg = synth_config();
  cfg.holdout_fraction = 0.25;
  cfg.output_dir = dir / "out";
  const auto a = run(cfg);
  REQUIRE(a.reports.size() == 2);
  CHECK(a.reports[0].name == "holdout");
  CHECK(a.reports[1].name == "dev");
  CHECK(a.n_train == 150);
  CHECK(a.reports[0].report.n == 50);
  CHECK(a.reports[1].report.micro_f1 > 0.8);
  CHECK(a.config_hash == config_hash(cfg));
  std::vector<std::string> stages;
  for (const auto& t : a.timings) stages.push_back(t.stage);
  CHECK(stages == std::vector<std::string>{"resources", "load", "features", "train", "evaluate", "write"});

  for (auto name : {"config.json", "vectorizer.json", "model.json", "pipeline.json", "run.json",
                    "reports/holdout.tsv", "reports/dev.tsv", "reports/dev.json"}) {
    CHECK(fs::exists(cfg.output_dir / name));
  }
  const auto dev_tsv = slurp(cfg.output_dir / "reports/dev.tsv");
  CHECK(dev_tsv == render_report(a.reports[1].report, ReportFormat::tsv));
  CHECK(load_experiment_config(cfg.output_dir / "config.json").train_sources == cfg.train_sources);

  auto cfg2 = cfg;
  cfg2.output_dir = dir / "again";
  const auto b = run(cfg2);
  for (auto name : {"reports/holdout.tsv", "reports/dev.tsv", "reports/dev.json", "model.json", "vectorizer.json"}) {
    CHECK(slurp(cfg.output_dir / name) == slurp(cfg2.output_dir / name));
  }
  CHECK(b.reports[1].report == a.reports[1].report);

  const auto pipeline = load_pipeline(cfg.output_dir);
  const auto dev = load_source(cfg.eval_datasets[0]);
  CHECK(evaluate_pipeline(pipeline, dev) == a.reports[1].report);

  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path)) ++entries;
  CHECK(entries == 2);
}

TEST_CASE("failed runs name the stage and leave no partial output") {
  TempDir dir;
  write(dir / "bad.tsv", "joy\ts\tfine\nglee\ts\tbroken\n");
  auto cfg = synth_config();
  cfg.output_dir = dir / "out";
  run(cfg);
  const auto before = slurp(cfg.output_dir / "model.json");

  auto broken = cfg;
  broken.train_sources.push_back({"bad", SourceKind::canonical_tsv, dir / "bad.tsv", {}});
  try {
    run(broken);
    FAIL("expected RecordError");
  } catch (const RecordError& e) {
    CHECK(e.reason().rfind("load: ", 0) == 0);
    CHECK(e.record() == 2);
  }
  CHECK(slurp(cfg.output_dir / "model.json") == before);

  write(dir / "one.tsv", "joy\ts\tonly joy here\njoy\ts\tmore joy\n");
  auto single = cfg;
  single.train_sources = {{"one", SourceKind::canonical_tsv, dir / "one.tsv", {}}};
  try {
    run(single);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).rfind("train: ", 0) == 0);
  }

  write(dir / "blocker", "x");
  auto blocked = cfg;
  blocked.output_dir = dir / "blocker" / "out";
  try {
    run(blocked);
    FAIL("expected failure");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).rfind("write: ", 0) == 0);
  }

  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir.path)) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  CHECK(names == std::vector<std::string>{"bad.tsv", "blocker", "one.tsv", "out"});
}

TEST_CASE("disabling a feature family shrinks the feature space") {
  auto cfg = synth_config();
  cfg.features = FeatureConfig{};
  const auto full = run(cfg);
  const std::vector<std::function<void(FeatureConfig&)>> toggles = {
      [](FeatureConfig& f) { f.tfidf = false; },       [](FeatureConfig& f) { f.word_ngrams = false; },
      [](FeatureConfig& f) { f.char_ngrams = false; }, [](FeatureConfig& f) { f.negation = false; },
      [](FeatureConfig& f) { f.punctuation = false; },
  };
  for (const auto& t : toggles) {
    auto smaller = cfg;
    t(smaller.features);
    const auto r = run(smaller);
    CHECK(r.feature_dim < full.feature_dim);
    CHECK(r.layout.size() == full.layout.size() - 1);
  }
}

TEST_CASE("embedding modes") {
  TempDir dir;
  auto cfg = synth_config();
  cfg.features.embeddings = true;
  cfg.embeddings.mode = EmbeddingMode::train;
  cfg.embeddings.skipgram.dim = 8;
  cfg.embeddings.skipgram.epochs = 1;
  cfg.embeddings.skipgram.threads = 1;
  cfg.output_dir = dir / "train";
  const auto trained = run(cfg);
  CHECK(trained.layout.back().family == Family::embeddings);
  CHECK(trained.layout.back().dim == 8);
  REQUIRE(fs::exists(cfg.output_dir / "embeddings.txt"));
  const auto pipeline = load_pipeline(cfg.output_dir);
  CHECK(evaluate_pipeline(pipeline, load_source(cfg.eval_datasets[0])) == trained.reports[0].report);

  auto loaded = cfg;
  loaded.embeddings.mode = EmbeddingMode::load;
  loaded.embeddings.path = cfg.output_dir / "embeddings.txt";
  loaded.output_dir.clear();
  CHECK(run(loaded).reports[0].report == trained.reports[0].report);

  auto retro = cfg;
  retro.embeddings.mode = EmbeddingMode::retrofit;
  retro.lexicon = std::string(EMODIST_TEST_DATA) + "/toy_lexicon.tsv";
  retro.output_dir = dir / "retro";
  CHECK(run(retro).feature_dim == trained.feature_dim);
  CHECK(fs::exists(retro.output_dir / "embeddings.txt"));
}

TEST_CASE("page search") {
  TempDir dir;
  auto base = synth_config();
  const std::vector<SourceSpec> cands = {synth_source("a", 120, 11), synth_source("b", 120, 12),
                                         synth_source("c", 120, 13, 0.6)};
  const auto dev = synth_source("dev", 80, 14);
  const auto all = page_search(cands, dev, 3, base);
  CHECK(all.size() == 7);
  for (std::size_t i = 1; i < all.size(); ++i) {
    CHECK(all[i].micro_f1 <= all[i - 1].micro_f1);
    if (all[i].micro_f1 == all[i - 1].micro_f1) CHECK(all[i].sources.size() >= all[i - 1].sources.size());
  }
  CHECK(page_search(cands, dev, 2, base).size() == 6);
  CHECK(page_search(cands, dev, 1, base).size() == 3);

  // The top subset retrained through a full run reproduces its score.
  auto cfg = base;
  cfg.features = FeatureConfig::tfidf_only();
  cfg.train_sources.clear();
  for (const auto& name : all[0].sources) {
    for (const auto& c : cands) {
      if (c.name == name) cfg.train_sources.push_back(c);
    }
  }
  cfg.eval_datasets = {dev};
  CHECK(run(cfg).reports[0].report.micro_f1 == all[0].micro_f1);

  // A single candidate matches a plain run.
  const std::vector<SourceSpec> one = {cands[0]};
  const auto single = page_search(one, dev, 1, base);
  REQUIRE(single.size() == 1);
  cfg.train_sources = one;
  CHECK(single[0].micro_f1 == run(cfg).reports[0].report.micro_f1);

  CHECK_THROWS_AS(page_search(cands, dev, 0, base), ConfigError);
  CHECK_THROWS_AS(page_search(cands, dev, 4, base), ConfigError);
  CHECK_THROWS_AS(page_search(std::span<const SourceSpec>{}, dev, 1, base), ConfigError);
}

TEST_CASE("presets") {
  CHECK(presets().size() == 3);
  REQUIRE(find_preset("b-m"));
  CHECK(find_preset("b-m")->sources == std::vector<std::string_view>{"Time", "TheGuardian", "Disney"});
  CHECK(find_preset("ft-m")->sources == std::vector<std::string_view>{"HuffPostWeirdNews", "ESPN", "CNN"});
  CHECK(find_preset("ise-m")->sources == std::vector<std::string_view>{"Time", "TheGuardian", "CookingLight"});
  CHECK(find_preset("x") == nullptr);
  CHECK_THROWS_AS(preset_config("x", "feeds"), ConfigError);

  const auto cfg = preset_config("ft-m", "feeds");
  REQUIRE(cfg.train_sources.size() == 3);
  CHECK(cfg.train_sources[0].path == fs::path("feeds") / "HuffPostWeirdNews.json");
  CHECK(cfg.train_sources[0].kind == SourceKind::reaction_feed);
  CHECK_FALSE(cfg.features.lexicon);
  CHECK_FALSE(cfg.features.embeddings);
  const auto with = preset_config("b-m", "feeds", "vecs.txt");
  CHECK(with.features.embeddings);
  CHECK(with.embeddings.mode == EmbeddingMode::load);
}

TEST_CASE("pipeline save and load") {
  TempDir dir;
  const auto docs = synth_corpus(160, 10, 0.1, 3);
  const auto p = train_pipeline(docs, FeatureConfig{}, TrainConfig{});
  save_pipeline(p, dir.path);
  const auto back = load_pipeline(dir.path);
  CHECK(back.model == p.model);
  CHECK(back.extractor.dim() == p.extractor.dim());
  for (const auto& d : docs) CHECK(back.features(d.text) == p.features(d.text));
  CHECK_THROWS_AS(load_pipeline(dir / "missing"), DataError);
  CHECK_THROWS_AS(train_pipeline(std::span<const LabeledDoc>{}, FeatureConfig{}, TrainConfig{}), DataError);
}
