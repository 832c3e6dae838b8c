#pragma once

#include <cstddef>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "emodist/emotion.hpp"
#include "emodist/sparse.hpp"

namespace emodist {

enum class Loss { hinge, squared_hinge };
enum class ClassWeight { uniform, balanced };

struct TrainConfig {
  double C = 1.0;
  std::size_t epochs = 50;
  std::uint64_t seed = 1;
  Loss loss = Loss::hinge;
  ClassWeight class_weight = ClassWeight::uniform;
  /// Evaluate each binary objective at the averaged iterate after every
  /// epoch and keep the history in the model.
  bool record_objective = false;
  /// Also throw std::logic_error if that objective ever increases.
  bool check_objective = false;

  /// Throws ConfigError unless C > 0 and epochs >= 1.
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

nlohmann::json to_json(const TrainConfig& cfg);
/// Rejects unknown keys; missing keys keep their defaults.
TrainConfig train_config_from_json(const nlohmann::json& j);

struct BinaryModel {
  std::vector<double> weights;
  double bias = 0.0;
  /// Objective after each epoch, when recorded.
  std::vector<double> objective_history;
};

/// One-vs-rest linear model. Row k of `weights` scores `classes[k]`.
struct LinearModel {
  std::vector<Emotion> classes;
  std::vector<std::vector<double>> weights;
  std::vector<double> biases;
  std::size_t dim = 0;
  TrainConfig meta;
  std::vector<std::vector<double>> objective_history;

  bool operator==(const LinearModel&) const = default;
};

/// (1/2)|w|^2 + C * sum_i s_i * loss(y_i (w.x_i + b)), with s_i the sample
/// weights (all 1 when empty).
double binary_objective(std::span<const double> w, double b, std::span<const SparseVector> X, std::span<const int> y,
                        std::span<const double> sample_weight, double C, Loss loss);

/// Visit order for one training epoch.
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch);

/// Averaged SGD on the primal objective with step 1/(lambda (t + t0)),
/// lambda = 1/(C n), t0 = 1/lambda; the bias is an unregularized intercept.
/// After every epoch the returned iterate moves toward the running average
/// by the largest halving step that does not raise the objective, with the
/// intercept set to its exact minimizer for the trial weights. With
/// `shuffle` off examples are visited in input order every epoch. Labels
/// are +1 / -1.
BinaryModel train_binary(std::span<const SparseVector> X, std::span<const int> y, std::span<const double> sample_weight,
                         const TrainConfig& cfg, bool shuffle = true);

/// Trains one binary problem per class present in `y`. Throws DataError
/// for fewer than two examples or classes, mismatched lengths, or mixed
/// feature dimensionality.
LinearModel train(std::span<const SparseVector> X, std::span<const Emotion> y, const TrainConfig& cfg);

/// w_c.x + b_c per model class, in model class order. Throws DataError on a
/// dimension mismatch.
std::vector<double> decision_scores(const LinearModel& model, const SparseVector& x);

/// Highest-scoring class; ties go to the earlier class.
Emotion predict(const LinearModel& model, const SparseVector& x);
std::vector<Emotion> predict_all(const LinearModel& model, std::span<const SparseVector> X);

nlohmann::json to_json(const LinearModel& model);
LinearModel model_from_json(const nlohmann::json& j);

}  // namespace emodist
