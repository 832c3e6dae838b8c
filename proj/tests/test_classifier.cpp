#include <doctest.h>

#include <cmath>

#include "emodist/classifier.hpp"
#include "emodist/corpus.hpp"
#include "emodist/error.hpp"
#include "emodist/features.hpp"
#include "emodist/random.hpp"

using namespace emodist;

namespace {

SparseVector dense(std::vector<double> v) { return SparseVector::from_dense(v); }

LinearModel hand_model(std::vector<std::vector<double>> w, std::vector<double> b) {
  LinearModel m;
  m.classes.assign(kEmotions.begin(), kEmotions.begin() + static_cast<std::ptrdiff_t>(w.size()));
  m.dim = w.front().size();
  m.weights = std::move(w);
  m.biases = std::move(b);
  return m;
}

struct Dataset {
  std::vector<SparseVector> X;
  std::vector<Emotion> y;
};

Dataset planted(std::size_t n, double noise, std::uint64_t seed) {
  const auto docs = synth_corpus(n, 20, noise, seed);
  std::vector<std::string> texts;
  Dataset d;
  for (const auto& doc : docs) {
    texts.push_back(doc.text);
    d.y.push_back(doc.label);
  }
  const auto v = Vectorizer::fit(texts, FeatureConfig::tfidf_only());
  for (const auto& t : texts) d.X.push_back(v.tfidf(t));
  return d;
}

double accuracy(const LinearModel& m, const Dataset& d) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < d.X.size(); ++i) hit += predict(m, d.X[i]) == d.y[i];
  return static_cast<double>(hit) / static_cast<double>(d.X.size());
}

}  // namespace

TEST_CASE("train config validation and JSON") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.C = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  TrainConfig custom;
  custom.C = 0.25;
  custom.loss = Loss::squared_hinge;
  custom.class_weight = ClassWeight::balanced;
  custom.seed = 77;
  CHECK(train_config_from_json(to_json(custom)) == custom);
  CHECK_THROWS_AS(train_config_from_json(nlohmann::json{{"c", 1.0}}), ConfigError);
  CHECK_THROWS_AS(train_config_from_json(nlohmann::json{{"C", "big"}}), ConfigError);
}

TEST_CASE("decision scores and prediction") {
  const auto m = hand_model({{1, 0}, {0, 1}}, {0.5, -0.5});
  CHECK(decision_scores(m, SparseVector(2)) == std::vector<double>{0.5, -0.5});
  const auto x = dense({3, 0});
  CHECK(decision_scores(m, x)[0] == 3.5);
  const auto m0 = hand_model({{1, 0}}, {0.0});
  CHECK(decision_scores(m0, x)[0] == 3.0);

  const auto y = dense({1.5, -2.0});
  const auto s1 = decision_scores(m, y);
  const auto s2 = decision_scores(m, y.scaled(2.0));
  for (std::size_t c = 0; c < 2; ++c) CHECK(s2[c] - m.biases[c] == doctest::Approx(2.0 * (s1[c] - m.biases[c])));

  CHECK_THROWS_AS(decision_scores(m, SparseVector(3)), DataError);
}

TEST_CASE("predict is an ordinal-tie-broken argmax") {
  const auto zero = SparseVector(1);
  CHECK(predict(hand_model({{0}, {0}, {0}, {0}}, {1, 3, 2, 0}), zero) == Emotion::joy);
  CHECK(predict(hand_model({{0}, {0}, {0}, {0}}, {4, 4, 4, 4}), zero) == Emotion::anger);
  CHECK(predict(hand_model({{0}, {0}, {0}, {0}}, {1, 3, 3, 0}), zero) == Emotion::joy);

  Rng rng(8);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> b(4);
    for (auto& v : b) v = static_cast<double>(uniform_index(rng, 5)) - 2.0;
    const auto base = predict(hand_model({{0}, {0}, {0}, {0}}, b), zero);
    std::vector<double> shifted = b, cubed = b, exp = b;
    for (auto& v : shifted) v += 7.0;
    for (auto& v : cubed) v = v * v * v;
    for (auto& v : exp) v = std::exp(v);
    CHECK(predict(hand_model({{0}, {0}, {0}, {0}}, shifted), zero) == base);
    CHECK(predict(hand_model({{0}, {0}, {0}, {0}}, cubed), zero) == base);
    CHECK(predict(hand_model({{0}, {0}, {0}, {0}}, exp), zero) == base);
  }
}

TEST_CASE("two separable points with large C") {
  const std::vector<SparseVector> X = {dense({1.0, 2.0}), dense({-1.0, -0.5})};
  const std::vector<Emotion> y = {Emotion::anger, Emotion::joy};
  TrainConfig cfg;
  cfg.C = 1000.0;
  cfg.epochs = 200;
  const auto m = train(X, y, cfg);
  REQUIRE(m.classes == std::vector<Emotion>{Emotion::anger, Emotion::joy});
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < 2; ++i) {
      const double label = (y[i] == m.classes[c]) ? 1.0 : -1.0;
      CHECK(label * (X[i].dot(m.weights[c]) + m.biases[c]) >= 1.0 - 1e-3);
    }
  }
  CHECK(predict(m, X[0]) == Emotion::anger);
  CHECK(predict(m, X[1]) == Emotion::joy);
}

TEST_CASE("training errors") {
  const std::vector<SparseVector> X = {dense({1.0}), dense({2.0})};
  CHECK_THROWS_AS(train(X, std::vector<Emotion>{Emotion::joy, Emotion::joy}, {}), DataError);
  CHECK_THROWS_AS(train(X, std::vector<Emotion>{Emotion::joy}, {}), DataError);
  CHECK_THROWS_AS(train(std::vector<SparseVector>{dense({1.0})}, std::vector<Emotion>{Emotion::joy}, {}), DataError);
  const std::vector<SparseVector> mixed = {SparseVector(2), SparseVector(3)};
  CHECK_THROWS_AS(train(mixed, std::vector<Emotion>{Emotion::joy, Emotion::anger}, {}), DataError);
}

TEST_CASE("training is deterministic and model JSON round-trips") {
  const auto d = planted(200, 0.2, 3);
  TrainConfig cfg;
  cfg.epochs = 5;
  const auto a = train(d.X, d.y, cfg);
  const auto b = train(d.X, d.y, cfg);
  CHECK(a == b);
  const auto text = to_json(a).dump();
  CHECK(text == to_json(b).dump());
  const auto back = model_from_json(nlohmann::json::parse(text));
  CHECK(back == a);
  CHECK(to_json(back).dump() == text);

  auto j = nlohmann::json::parse(text);
  j["version"] = 2;
  CHECK_THROWS_AS(model_from_json(j), DataError);
}

TEST_CASE("planted corpus without noise is fit perfectly") {
  const auto d = planted(400, 0.0, 1);
  const auto m = train(d.X, d.y, {});
  CHECK(m.classes.size() == 4);
  CHECK(accuracy(m, d) == 1.0);
  for (const auto& w : m.weights) {
    for (double v : w) CHECK(std::isfinite(v));
  }
}

TEST_CASE("objective is non-increasing across epochs") {
  for (auto loss : {Loss::hinge, Loss::squared_hinge}) {
    for (double C : {0.1, 1.0, 10.0}) {
      for (std::uint64_t seed : {1u, 2u}) {
        const auto d = planted(300, 0.3, seed);
        TrainConfig cfg;
        cfg.C = C;
        cfg.loss = loss;
        cfg.seed = seed;
        cfg.epochs = 30;
        cfg.record_objective = true;
        cfg.check_objective = true;
        CAPTURE(C);
        CAPTURE(seed);
        LinearModel m;
        CHECK_NOTHROW(m = train(d.X, d.y, cfg));
        for (const auto& history : m.objective_history) {
          CHECK(history.size() == cfg.epochs);
          for (std::size_t k = 1; k < history.size(); ++k) {
            CHECK(history[k] <= history[k - 1] * (1.0 + 1e-9) + 1e-12);
          }
        }
      }
    }
  }
}

TEST_CASE("shuffle order is the only effect of example order") {
  const auto d = planted(120, 0.2, 5);
  std::vector<int> y;
  for (auto e : d.y) y.push_back(e == Emotion::joy ? 1 : -1);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.seed = 42;
  const auto shuffled = train_binary(d.X, y, {}, cfg, true);

  const auto order = epoch_order(d.X.size(), cfg.seed, 0);
  std::vector<SparseVector> X2;
  std::vector<int> y2;
  for (auto i : order) {
    X2.push_back(d.X[i]);
    y2.push_back(y[i]);
  }
  const auto in_order = train_binary(X2, y2, {}, cfg, false);
  CHECK(in_order.weights == shuffled.weights);
  CHECK(in_order.bias == shuffled.bias);
}

TEST_CASE("balanced class weights") {
  // 30 anger vs 3 joy examples along one axis; balanced weighting moves the
  // joy boundary toward the majority class.
  std::vector<SparseVector> X;
  std::vector<Emotion> y;
  Rng rng(4);
  for (int i = 0; i < 30; ++i) {
    X.push_back(dense({1.0 + uniform01(rng), 1.0}));
    y.push_back(Emotion::anger);
  }
  for (int i = 0; i < 3; ++i) {
    X.push_back(dense({-1.0 - uniform01(rng), 1.0}));
    y.push_back(Emotion::joy);
  }
  TrainConfig uniform;
  uniform.C = 0.01;
  TrainConfig balanced = uniform;
  balanced.class_weight = ClassWeight::balanced;
  const auto mu = train(X, y, uniform);
  const auto mb = train(X, y, balanced);
  const auto probe = dense({0.0, 1.0});
  CHECK(decision_scores(mb, probe)[1] > decision_scores(mu, probe)[1]);
}
