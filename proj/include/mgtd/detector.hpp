#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mgtd/corpus.hpp"
#include "mgtd/features.hpp"
#include "mgtd/metrics.hpp"

namespace mgtd {

struct Hyperparams {
  double learning_rate = 0.1;
  int epochs = 5;
  int batch_size = 32;
  double l2_penalty = 1e-6;
  std::uint64_t seed = 1;
  /// Fraction of all steps spent in linear warmup.
  double warmup_ratio = 0.001;

  void validate() const;
};

inline constexpr std::array<double, 4> kLearningRateGrid{0.01, 0.05, 0.1, 0.5};
inline constexpr int kModelFormatVersion = 1;

/// Logistic-regression parameters. `weights` is indexed by feature slot and is
/// mostly zero; only non-zero entries are serialized.
struct ModelParams {
  std::vector<double> weights;
  double bias = 0.0;
  double threshold = 0.5;
  FeatureConfig config;
  std::string fingerprint;
};

struct Prediction {
  Label label = Label::Human;
  double score = 0.0;  // P(Machine)
};

/// Feature vectors (L2-normalized) and gold labels for a list of units.
struct Dataset {
  std::vector<FeatureVector> vectors;
  std::vector<Label> labels;
  std::string fingerprint;
  std::uint32_t dimension = 0;

  std::size_t size() const { return labels.size(); }
};

struct TrainResult {
  ModelParams model;
  /// Regularized mean log-loss over the training set after each epoch.
  std::vector<double> epoch_loss;
};

struct SeedMetrics {
  std::uint64_t seed = 0;
  ConfusionMatrix confusion;
  MetricSet metrics;
};

struct Selection {
  ModelParams model;
  double learning_rate = 0.0;
  double valid_macro_f1 = 0.0;
};

namespace detector {

Dataset featurize(const std::vector<ExampleUnit>& units, const features::Featurizer& featurizer);

/// Mini-batch SGD on L2-regularized logistic loss with linear warmup then
/// linear decay. Throws Error on single-class data or a non-finite loss.
TrainResult train_logged(const Dataset& data, const FeatureConfig& config, const Hyperparams& hyper);

ModelParams train(const std::vector<ExampleUnit>& units, const FeatureConfig& config,
                  const Hyperparams& hyper);
ModelParams train(const std::vector<ExampleUnit>& units, const features::Featurizer& featurizer,
                  const Hyperparams& hyper);

double decision_value(const ModelParams& params, const FeatureVector& vector);

/// Throws FingerprintMismatch when the vector was built with another configuration.
Prediction predict(const ModelParams& params, const FeatureVector& vector);

std::vector<Prediction> predict(const ModelParams& params, const Dataset& data);

std::vector<Label> predict_labels(const ModelParams& params, const features::Featurizer& featurizer,
                                  const std::vector<ExampleUnit>& units);

/// One model per seed, each scored on `eval_units`; results follow `seeds` order.
std::vector<SeedMetrics> run_seeds(const std::vector<ExampleUnit>& train_units,
                                   const std::vector<ExampleUnit>& eval_units,
                                   const FeatureConfig& config, const Hyperparams& hyper_base,
                                   std::span<const std::uint64_t> seeds);

/// Trains one model per learning rate and keeps the best validation macro-F1
/// (first in grid order on ties).
Selection select_learning_rate(const Dataset& train, const Dataset& valid,
                               const FeatureConfig& config, const Hyperparams& hyper,
                               std::span<const double> grid);

void save_model(std::ostream& out, const ModelParams& params);
void save_model_file(const std::string& path, const ModelParams& params);
/// Throws FormatError on a bad header or version.
ModelParams load_model(std::istream& in);
ModelParams load_model_file(const std::string& path);

}  // namespace detector
}  // namespace mgtd
