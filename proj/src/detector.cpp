#include "mgtd/detector.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "mgtd/error.hpp"
#include "mgtd/rng.hpp"

namespace mgtd {

void Hyperparams::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw Error("learning_rate must be positive");
  if (epochs < 1) throw Error("epochs must be >= 1");
  if (batch_size < 1) throw Error("batch_size must be >= 1");
  if (!(l2_penalty >= 0.0)) throw Error("l2_penalty must be non-negative");
  if (!(warmup_ratio >= 0.0 && warmup_ratio < 1.0)) throw Error("warmup_ratio must lie in [0,1)");
}

namespace detector {
namespace {

constexpr std::uint64_t kSaltEpochOrder = 0xe90c;

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double log_loss(double z, bool positive) { return softplus(positive ? -z : z); }

double sparse_dot(const std::vector<double>& w, const FeatureVector& x) {
  double s = 0.0;
  for (const auto& [i, v] : x.entries) s += w[i] * v;
  return s;
}

std::string fmt_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw FormatError("bad number '" + std::string(s) + "' in model file", line);
  return v;
}

}  // namespace

Dataset featurize(const std::vector<ExampleUnit>& units, const features::Featurizer& featurizer) {
  Dataset d;
  d.fingerprint = featurizer.fingerprint();
  d.dimension = featurizer.dimension();
  d.vectors.reserve(units.size());
  d.labels.reserve(units.size());
  for (const auto& u : units) {
    d.vectors.push_back(featurizer.extract(u.text).normalized());
    d.labels.push_back(u.label);
  }
  return d;
}

TrainResult train_logged(const Dataset& data, const FeatureConfig& config, const Hyperparams& hyper) {
  hyper.validate();
  const std::size_t n = data.size();
  const auto machines = static_cast<std::size_t>(std::count(data.labels.begin(), data.labels.end(), Label::Machine));
  if (machines == 0 || machines == n)
    throw Error("training data must contain both classes (got " + std::to_string(machines) +
                " machine of " + std::to_string(n) + " units)");

  // Weights are kept as scale * v so the L2 shrinkage of a step costs O(1).
  std::vector<double> v(data.dimension, 0.0);
  double scale = 1.0;
  double bias = 0.0;

  const auto batch = static_cast<std::size_t>(hyper.batch_size);
  const std::size_t steps_per_epoch = (n + batch - 1) / batch;
  const std::size_t total_steps = steps_per_epoch * static_cast<std::size_t>(hyper.epochs);
  std::size_t warmup = static_cast<std::size_t>(std::ceil(hyper.warmup_ratio * static_cast<double>(total_steps)));
  warmup = std::min(warmup, total_steps - 1);

  auto lr_at = [&](std::size_t step) {
    if (step < warmup) return hyper.learning_rate * static_cast<double>(step + 1) / static_cast<double>(warmup);
    return hyper.learning_rate * static_cast<double>(total_steps - step) /
           static_cast<double>(total_steps - warmup);
  };

  auto full_loss = [&] {
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      loss += log_loss(scale * sparse_dot(v, data.vectors[i]) + bias, data.labels[i] == Label::Machine);
    double sq = 0.0;
    for (double x : v) sq += x * x;
    return loss / static_cast<double>(n) + 0.5 * hyper.l2_penalty * scale * scale * sq;
  };

  TrainResult result;
  std::vector<std::size_t> order(n);
  std::vector<double> residual;
  std::size_t step = 0;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMix64 rng(stream_seed(hyper.seed, static_cast<std::uint64_t>(epoch), kSaltEpochOrder));
    shuffle(std::span<std::size_t>(order), rng);

    for (std::size_t b = 0; b < n; b += batch, ++step) {
      const std::size_t e = std::min(n, b + batch);
      const double m = static_cast<double>(e - b);
      residual.assign(e - b, 0.0);
      double batch_loss = 0.0;
      double bias_grad = 0.0;
      for (std::size_t k = b; k < e; ++k) {
        const std::size_t i = order[k];
        const bool pos = data.labels[i] == Label::Machine;
        const double z = scale * sparse_dot(v, data.vectors[i]) + bias;
        batch_loss += log_loss(z, pos);
        residual[k - b] = sigmoid(z) - (pos ? 1.0 : 0.0);
        bias_grad += residual[k - b];
      }
      if (!std::isfinite(batch_loss))
        throw Error("non-finite training loss at step " + std::to_string(step));

      const double lr = lr_at(step);
      scale *= 1.0 - lr * m * hyper.l2_penalty;
      if (!(scale > 1e-9)) throw Error("weights collapsed at step " + std::to_string(step) + "; lower l2_penalty or learning_rate");
      for (std::size_t k = b; k < e; ++k) {
        const double g = lr * residual[k - b] / scale;
        for (const auto& [j, x] : data.vectors[order[k]].entries) v[j] -= g * x;
      }
      bias -= lr * bias_grad;
      if (scale < 1e-6) {
        for (double& x : v) x *= scale;
        scale = 1.0;
      }
    }
    const double loss = full_loss();
    if (!std::isfinite(loss)) throw Error("non-finite training loss at step " + std::to_string(step));
    result.epoch_loss.push_back(loss);
  }

  ModelParams& model = result.model;
  model.weights.resize(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) model.weights[j] = v[j] * scale;
  model.bias = bias;
  model.threshold = 0.5;
  model.config = config;
  model.fingerprint = data.fingerprint;
  return result;
}

ModelParams train(const std::vector<ExampleUnit>& units, const features::Featurizer& featurizer,
                  const Hyperparams& hyper) {
  return train_logged(featurize(units, featurizer), featurizer.config(), hyper).model;
}

ModelParams train(const std::vector<ExampleUnit>& units, const FeatureConfig& config,
                  const Hyperparams& hyper) {
  return train(units, features::Featurizer(config), hyper);
}

double decision_value(const ModelParams& params, const FeatureVector& vector) {
  double z = params.bias;
  for (const auto& [i, x] : vector.entries) {
    if (i >= params.weights.size())
      throw Error("feature index " + std::to_string(i) + " outside model dimension");
    z += params.weights[i] * x;
  }
  return z;
}

Prediction predict(const ModelParams& params, const FeatureVector& vector) {
  if (vector.config_fingerprint != params.fingerprint)
    throw FingerprintMismatch(params.fingerprint, vector.config_fingerprint);
  const double score = sigmoid(decision_value(params, vector));
  return {score >= params.threshold ? Label::Machine : Label::Human, score};
}

std::vector<Prediction> predict(const ModelParams& params, const Dataset& data) {
  std::vector<Prediction> out;
  out.reserve(data.size());
  for (const auto& v : data.vectors) out.push_back(predict(params, v));
  return out;
}

std::vector<Label> predict_labels(const ModelParams& params, const features::Featurizer& featurizer,
                                  const std::vector<ExampleUnit>& units) {
  if (featurizer.fingerprint() != params.fingerprint)
    throw FingerprintMismatch(params.fingerprint, featurizer.fingerprint());
  std::vector<Label> out;
  out.reserve(units.size());
  for (const auto& u : units) out.push_back(predict(params, featurizer.extract(u.text).normalized()).label);
  return out;
}

std::vector<SeedMetrics> run_seeds(const std::vector<ExampleUnit>& train_units,
                                   const std::vector<ExampleUnit>& eval_units,
                                   const FeatureConfig& config, const Hyperparams& hyper_base,
                                   std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw Error("run_seeds: no seeds given");
  const features::Featurizer featurizer(config);
  const Dataset train_data = featurize(train_units, featurizer);
  const Dataset eval_data = featurize(eval_units, featurizer);
  std::vector<SeedMetrics> out;
  for (std::uint64_t seed : seeds) {
    Hyperparams h = hyper_base;
    h.seed = seed;
    const ModelParams model = train_logged(train_data, config, h).model;
    std::vector<Label> preds;
    for (const auto& p : predict(model, eval_data)) preds.push_back(p.label);
    SeedMetrics sm;
    sm.seed = seed;
    sm.confusion = eval::confusion(preds, eval_data.labels);
    sm.metrics = eval::metric_set(sm.confusion);
    out.push_back(std::move(sm));
  }
  return out;
}

Selection select_learning_rate(const Dataset& train, const Dataset& valid, const FeatureConfig& config,
                               const Hyperparams& hyper, std::span<const double> grid) {
  if (grid.empty()) throw Error("learning-rate grid is empty");
  Selection best;
  bool have = false;
  for (double lr : grid) {
    Hyperparams h = hyper;
    h.learning_rate = lr;
    ModelParams model = train_logged(train, config, h).model;
    double f1 = 0.0;
    if (valid.size() > 0) {
      std::vector<Label> preds;
      for (const auto& p : predict(model, valid)) preds.push_back(p.label);
      f1 = eval::macro_f1(eval::confusion(preds, valid.labels));
    }
    if (!have || f1 > best.valid_macro_f1) {
      best = {std::move(model), lr, f1};
      have = true;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Model files

void save_model(std::ostream& out, const ModelParams& params) {
  std::size_t nnz = 0;
  for (double w : params.weights) nnz += w != 0.0;
  out << "mgtd-model " << kModelFormatVersion << '\n'
      << "fingerprint " << params.fingerprint << '\n'
      << "config " << params.config.canonical() << '\n'
      << "dimension " << params.weights.size() << '\n'
      << "threshold " << fmt_double(params.threshold) << '\n'
      << "bias " << fmt_double(params.bias) << '\n'
      << "weights " << nnz << '\n';
  for (std::size_t i = 0; i < params.weights.size(); ++i)
    if (params.weights[i] != 0.0) out << i << ' ' << fmt_double(params.weights[i]) << '\n';
}

void save_model_file(const std::string& path, const ModelParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file " + path);
  save_model(out, params);
}

ModelParams load_model(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto header = [&](std::string_view key) {
    if (!std::getline(in, line)) throw FormatError("truncated model file", lineno + 1);
    ++lineno;
    if (line.rfind(std::string(key) + ' ', 0) != 0)
      throw FormatError("expected '" + std::string(key) + "' in model file", lineno);
    return line.substr(key.size() + 1);
  };

  const std::string version = header("mgtd-model");
  if (version != std::to_string(kModelFormatVersion))
    throw FormatError("unsupported model format version " + version + " (expected " +
                      std::to_string(kModelFormatVersion) + ")", lineno);
  ModelParams p;
  p.fingerprint = header("fingerprint");
  p.config = FeatureConfig::parse_canonical(header("config"));
  const auto dim = static_cast<std::size_t>(parse_double(header("dimension"), lineno));
  p.threshold = parse_double(header("threshold"), lineno);
  p.bias = parse_double(header("bias"), lineno);
  const auto nnz = static_cast<std::size_t>(parse_double(header("weights"), lineno));
  if (!(p.threshold > 0.0 && p.threshold < 1.0)) throw FormatError("threshold outside (0,1)", 5);
  p.weights.assign(dim, 0.0);
  for (std::size_t k = 0; k < nnz; ++k) {
    if (!std::getline(in, line)) throw FormatError("truncated weight list", lineno + 1);
    ++lineno;
    auto sp = line.find(' ');
    if (sp == std::string::npos) throw FormatError("bad weight line", lineno);
    const auto idx = static_cast<std::size_t>(parse_double(std::string_view(line).substr(0, sp), lineno));
    if (idx >= dim) throw FormatError("weight index out of range", lineno);
    const double w = parse_double(std::string_view(line).substr(sp + 1), lineno);
    if (!std::isfinite(w)) throw FormatError("non-finite weight", lineno);
    p.weights[idx] = w;
  }
  return p;
}

ModelParams load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file " + path);
  try {
    return load_model(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace detector
}  // namespace mgtd
