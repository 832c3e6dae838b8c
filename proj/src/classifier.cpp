#include "emodist/classifier.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

#include "emodist/error.hpp"
#include "emodist/random.hpp"

namespace emodist {
namespace {

using nlohmann::json;

constexpr int kModelVersion = 1;
constexpr double kMinAcceptStep = 0x1p-20;

std::string_view to_string(Loss l) { return l == Loss::hinge ? "hinge" : "squared_hinge"; }
std::string_view to_string(ClassWeight w) { return w == ClassWeight::uniform ? "uniform" : "balanced"; }

double loss_value(double margin, Loss loss) {
  const double slack = std::max(0.0, 1.0 - margin);
  return loss == Loss::hinge ? slack : slack * slack;
}

// d loss / d score, times -y: the step direction scale.
double loss_step(double margin, Loss loss) {
  if (margin >= 1.0) return 0.0;
  return loss == Loss::hinge ? 1.0 : 2.0 * (1.0 - margin);
}

void add_scaled(std::vector<double>& dense, const SparseVector& x, double scale) {
  for (const auto& [index, value] : x.entries()) dense[index] += scale * value;
}

// Exact minimizer over b of sum_i s_i loss(y_i (z_i + b)). The loss is
// convex in b with breakpoints at y_i - z_i: below its breakpoint a positive
// example is active, above it a negative one is. One sweep over the sorted
// breakpoints finds where the derivative changes sign.
double best_bias(std::span<const double> z, std::span<const int> y, std::span<const double> sample_weight, Loss loss) {
  const std::size_t n = z.size();
  std::vector<std::pair<double, std::size_t>> points(n);
  for (std::size_t i = 0; i < n; ++i) points[i] = {y[i] - z[i], i};
  std::sort(points.begin(), points.end());
  auto weight = [&](std::size_t i) { return sample_weight.empty() ? 1.0 : sample_weight[i]; };

  if (loss == Loss::hinge) {
    // The slope starts at minus the positive weight and every breakpoint
    // raises it by that example's weight.
    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i) slope -= y[i] > 0 ? weight(i) : 0.0;
    for (const auto& [bp, i] : points) {
      slope += weight(i);
      if (slope >= 0.0) return bp;
    }
    return points.back().first;
  }

  // Squared hinge: on each segment the derivative is 2 (S b - T) over the
  // active set, with S the active weight and T the weighted breakpoint sum.
  double s_active = 0.0;
  double t_active = 0.0;
  for (const auto& [bp, i] : points) {
    if (y[i] > 0) {
      s_active += weight(i);
      t_active += weight(i) * bp;
    }
  }
  double lo = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= n; ++k) {
    const double hi = k < n ? points[k].first : std::numeric_limits<double>::infinity();
    if (s_active > 0.0) {
      const double root = t_active / s_active;
      if (root <= hi) return std::max(root, lo);
    } else {
      return std::isfinite(hi) ? hi : lo;
    }
    if (k == n) break;
    const auto& [bp, i] = points[k];
    const double sign = y[i] > 0 ? -1.0 : 1.0;
    s_active += sign * weight(i);
    t_active += sign * weight(i) * bp;
    lo = hi;
  }
  return lo;
}

// Averaged SGD with lazy scaling: w = v / w_div and the running average is
// (a + w_frac * v) / a_div.
class AveragedSgd {
 public:
  AveragedSgd(std::span<const double> w, double b) : v_(w.begin(), w.end()), a_(w.size(), 0.0), bias_(b) {}

  double score(const SparseVector& x) const { return x.dot(v_) / w_div_ + bias_; }

  void step(const SparseVector& x, double eta, double lambda, double direction, double mu) {
    if (w_div_ > 1e5 || a_div_ > 1e5) renormalize();
    w_div_ /= 1.0 - eta * lambda;
    const double etd = eta * direction * w_div_;
    if (etd != 0.0) add_scaled(v_, x, etd);
    bias_ += eta * direction;

    if (mu >= 1.0) {
      std::fill(a_.begin(), a_.end(), 0.0);
      a_div_ = w_div_;
      w_frac_ = 1.0;
    } else {
      if (etd != 0.0) add_scaled(a_, x, -w_frac_ * etd);
      a_div_ /= 1.0 - mu;
      w_frac_ += mu * a_div_ / w_div_;
    }
  }

  std::vector<double> averaged_weights() const {
    std::vector<double> w(v_.size());
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = (a_[k] + w_frac_ * v_[k]) / a_div_;
    return w;
  }

 private:
  void renormalize() {
    for (std::size_t k = 0; k < v_.size(); ++k) {
      a_[k] = (a_[k] + w_frac_ * v_[k]) / a_div_;
      v_[k] /= w_div_;
    }
    w_div_ = a_div_ = 1.0;
    w_frac_ = 0.0;
  }

  std::vector<double> v_;
  std::vector<double> a_;
  double w_div_ = 1.0;
  double a_div_ = 1.0;
  double w_frac_ = 0.0;
  double bias_ = 0.0;
};

Loss parse_loss(const std::string& s) {
  if (s == "hinge") return Loss::hinge;
  if (s == "squared_hinge") return Loss::squared_hinge;
  throw ConfigError("train.loss must be \"hinge\" or \"squared_hinge\"");
}

ClassWeight parse_class_weight(const std::string& s) {
  if (s == "uniform") return ClassWeight::uniform;
  if (s == "balanced") return ClassWeight::balanced;
  throw ConfigError("train.class_weight must be \"uniform\" or \"balanced\"");
}

}  // namespace

void TrainConfig::validate() const {
  if (!(C > 0.0) || !std::isfinite(C)) throw ConfigError("C must be a positive finite number");
  if (epochs == 0) throw ConfigError("epochs must be >= 1");
}

json to_json(const TrainConfig& cfg) {
  return json{{"C", cfg.C},
              {"epochs", cfg.epochs},
              {"seed", cfg.seed},
              {"loss", to_string(cfg.loss)},
              {"class_weight", to_string(cfg.class_weight)}};
}

TrainConfig train_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("train must be an object");
  TrainConfig cfg;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "C") {
        cfg.C = value.get<double>();
      } else if (key == "epochs") {
        cfg.epochs = value.get<std::size_t>();
      } else if (key == "seed") {
        cfg.seed = value.get<std::uint64_t>();
      } else if (key == "loss") {
        cfg.loss = parse_loss(value.get<std::string>());
      } else if (key == "class_weight") {
        cfg.class_weight = parse_class_weight(value.get<std::string>());
      } else {
        throw ConfigError("unknown key train." + key);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad train config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

double binary_objective(std::span<const double> w, double b, std::span<const SparseVector> X, std::span<const int> y,
                        std::span<const double> sample_weight, double C, Loss loss) {
  double reg = 0.0;
  for (double x : w) reg += x * x;
  double data = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    const double s = sample_weight.empty() ? 1.0 : sample_weight[i];
    data += s * loss_value(y[i] * (X[i].dot(w) + b), loss);
  }
  return 0.5 * reg + C * data;
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  Rng rng(mix_seed(seed, epoch));
  return shuffled_indices(n, rng);
}

BinaryModel train_binary(std::span<const SparseVector> X, std::span<const int> y, std::span<const double> sample_weight,
                         const TrainConfig& cfg, bool shuffle) {
  cfg.validate();
  if (X.empty() || X.size() != y.size()) throw DataError("train_binary: X and y must be non-empty and equal length");
  if (!sample_weight.empty() && sample_weight.size() != X.size()) throw DataError("train_binary: sample weights");
  const std::size_t dim = X.front().dim();
  const std::size_t n = X.size();
  const double lambda = 1.0 / (cfg.C * static_cast<double>(n));
  const double t0 = 1.0 / lambda;
  auto objective = [&](std::span<const double> w, double b) {
    return binary_objective(w, b, X, y, sample_weight, cfg.C, cfg.loss);
  };

  BinaryModel model;
  model.weights.assign(dim, 0.0);
  std::vector<double> scores(n);
  auto profiled_bias = [&](std::span<const double> w) {
    for (std::size_t i = 0; i < n; ++i) scores[i] = X[i].dot(w);
    return best_bias(scores, y, sample_weight, cfg.loss);
  };
  model.bias = profiled_bias(model.weights);
  double current = objective(model.weights, model.bias);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::vector<double> trial(dim);

  // Plain averaged SGD runs across all epochs; the returned iterate follows
  // its running average without ever raising the objective.
  AveragedSgd sgd(model.weights, model.bias);
  double t = 0.0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (shuffle) order = epoch_order(n, cfg.seed, epoch);
    for (std::size_t i : order) {
      const double eta = 1.0 / (lambda * (t + t0));
      const double margin = y[i] * sgd.score(X[i]);
      const double s = sample_weight.empty() ? 1.0 : sample_weight[i];
      const double direction = y[i] * s * loss_step(margin, cfg.loss);
      t += 1.0;
      sgd.step(X[i], eta, lambda, direction, 1.0 / t);
    }

    // Move toward the running average by the largest halving step that does
    // not raise the objective. The intercept is unregularized and SGD moves
    // it slowly, so each trial pairs its weights with their exact best bias.
    const auto candidate = sgd.averaged_weights();
    for (double step = 1.0; step >= kMinAcceptStep; step *= 0.5) {
      for (std::size_t k = 0; k < dim; ++k) trial[k] = model.weights[k] + step * (candidate[k] - model.weights[k]);
      const double trial_bias = profiled_bias(trial);
      const double value = objective(trial, trial_bias);
      if (value <= current) {
        model.weights.swap(trial);
        trial.resize(dim);
        model.bias = trial_bias;
        current = value;
        break;
      }
    }
    if (cfg.record_objective || cfg.check_objective) {
      if (cfg.check_objective && !model.objective_history.empty() && current > model.objective_history.back()) {
        throw std::logic_error("objective increased at epoch " + std::to_string(epoch + 1) + ": " +
                               std::to_string(model.objective_history.back()) + " -> " + std::to_string(current));
      }
      model.objective_history.push_back(current);
    }
  }
  return model;
}

LinearModel train(std::span<const SparseVector> X, std::span<const Emotion> y, const TrainConfig& cfg) {
  cfg.validate();
  if (X.size() != y.size()) throw DataError("train: X and y differ in length");
  if (X.size() < 2) throw DataError("train: need at least two examples");
  const std::size_t dim = X.front().dim();
  for (const auto& x : X) {
    if (x.dim() != dim) throw DataError("train: mixed feature dimensionality");
  }

  std::array<std::size_t, kNumEmotions> counts{};
  for (Emotion e : y) ++counts[ordinal(e)];
  LinearModel model;
  for (Emotion e : kEmotions) {
    if (counts[ordinal(e)] > 0) model.classes.push_back(e);
  }
  if (model.classes.size() < 2) throw DataError("train: need at least two distinct classes");
  model.dim = dim;
  model.meta = cfg;

  std::vector<double> sample_weight;
  if (cfg.class_weight == ClassWeight::balanced) {
    sample_weight.resize(y.size());
    const double k = static_cast<double>(model.classes.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      sample_weight[i] = static_cast<double>(y.size()) / (k * static_cast<double>(counts[ordinal(y[i])]));
    }
  }

  // Each binary problem owns its parameters, so the classes train
  // concurrently without affecting the result.
  std::vector<std::future<BinaryModel>> jobs;
  for (Emotion c : model.classes) {
    jobs.push_back(std::async(std::launch::async, [&, c] {
      std::vector<int> labels(y.size());
      for (std::size_t i = 0; i < y.size(); ++i) labels[i] = y[i] == c ? 1 : -1;
      return train_binary(X, labels, sample_weight, cfg);
    }));
  }
  for (auto& job : jobs) {
    BinaryModel m = job.get();
    model.weights.push_back(std::move(m.weights));
    model.biases.push_back(m.bias);
    model.objective_history.push_back(std::move(m.objective_history));
  }
  return model;
}

std::vector<double> decision_scores(const LinearModel& model, const SparseVector& x) {
  if (x.dim() != model.dim) {
    throw DataError("feature dimension " + std::to_string(x.dim()) + " does not match model dimension " +
                    std::to_string(model.dim));
  }
  std::vector<double> scores(model.classes.size());
  for (std::size_t k = 0; k < scores.size(); ++k) scores[k] = x.dot(model.weights[k]) + model.biases[k];
  return scores;
}

Emotion predict(const LinearModel& model, const SparseVector& x) {
  const auto scores = decision_scores(model, x);
  std::size_t best = 0;
  for (std::size_t k = 1; k < scores.size(); ++k) {
    if (scores[k] > scores[best]) best = k;
  }
  return model.classes[best];
}

std::vector<Emotion> predict_all(const LinearModel& model, std::span<const SparseVector> X) {
  std::vector<Emotion> out;
  out.reserve(X.size());
  for (const auto& x : X) out.push_back(predict(model, x));
  return out;
}

json to_json(const LinearModel& model) {
  json classes = json::array();
  for (Emotion e : model.classes) classes.push_back(to_string(e));
  return json{{"format", "emodist.linear_model"},
              {"version", kModelVersion},
              {"classes", classes},
              {"dim", model.dim},
              {"weights", model.weights},
              {"biases", model.biases},
              {"meta", to_json(model.meta)},
              {"objective_history", model.objective_history}};
}

LinearModel model_from_json(const json& j) {
  try {
    if (j.at("format") != "emodist.linear_model") throw DataError("not a linear model file");
    if (j.at("version") != kModelVersion) throw DataError("unsupported model version");
    LinearModel m;
    for (const auto& c : j.at("classes")) {
      const auto e = parse_emotion(c.get<std::string>());
      if (!e) throw DataError("unknown class in model: " + c.get<std::string>());
      m.classes.push_back(*e);
    }
    m.dim = j.at("dim").get<std::size_t>();
    m.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    m.biases = j.at("biases").get<std::vector<double>>();
    m.meta = train_config_from_json(j.at("meta"));
    m.objective_history = j.value("objective_history", std::vector<std::vector<double>>{});
    if (m.weights.size() != m.classes.size() || m.biases.size() != m.classes.size()) {
      throw DataError("model class count disagrees with weights");
    }
    for (const auto& w : m.weights) {
      if (w.size() != m.dim) throw DataError("model weight row has wrong dimension");
      if (!std::all_of(w.begin(), w.end(), [](double v) { return std::isfinite(v); })) {
        throw DataError("model weights must be finite");
      }
    }
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("malformed model metadata: ") + e.what());
  }
}

}  // namespace emodist
