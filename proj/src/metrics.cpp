#include "mgtd/metrics.hpp"

#include <cmath>
#include <numeric>

#include "mgtd/error.hpp"

namespace mgtd {

double ConfusionMatrix::accuracy() const {
  const std::size_t n = total();
  return n == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(n);
}

namespace eval {

ConfusionMatrix confusion(std::span<const Label> predictions, std::span<const Label> gold) {
  if (predictions.size() != gold.size())
    throw Error("confusion: " + std::to_string(predictions.size()) + " predictions for " +
                std::to_string(gold.size()) + " gold labels");
  if (gold.empty()) throw Error("confusion: no labels");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool pred_pos = predictions[i] == Label::Machine;
    const bool gold_pos = gold[i] == Label::Machine;
    if (pred_pos && gold_pos) ++cm.tp;
    else if (pred_pos) ++cm.fp;
    else if (gold_pos) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

double f1_score(double precision, double recall) {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

ClassScores prf1(const ConfusionMatrix& cm, Label positive_class) {
  // Human as positive class swaps the roles of the two outcomes.
  const bool machine = positive_class == Label::Machine;
  const auto tp = static_cast<double>(machine ? cm.tp : cm.tn);
  const auto fp = static_cast<double>(machine ? cm.fp : cm.fn);
  const auto fn = static_cast<double>(machine ? cm.fn : cm.fp);
  ClassScores s;
  if (tp + fp > 0) s.precision = tp / (tp + fp);
  else s.undefined = true;
  if (tp + fn > 0) s.recall = tp / (tp + fn);
  else s.undefined = true;
  if (s.precision + s.recall > 0) s.f1 = f1_score(s.precision, s.recall);
  else s.undefined = true;
  return s;
}

double macro_f1(const ConfusionMatrix& cm) {
  return 0.5 * (prf1(cm, Label::Machine).f1 + prf1(cm, Label::Human).f1);
}

MetricSet metric_set(const ConfusionMatrix& cm) {
  const ClassScores m = prf1(cm, Label::Machine);
  const ClassScores h = prf1(cm, Label::Human);
  return {
      {"accuracy", cm.accuracy()},    {"macro_f1", 0.5 * (m.f1 + h.f1)},
      {"machine_precision", m.precision}, {"machine_recall", m.recall},
      {"machine_f1", m.f1},           {"human_precision", h.precision},
      {"human_recall", h.recall},     {"human_f1", h.f1},
  };
}

Aggregate aggregate(std::span<const double> values) {
  Aggregate a;
  a.n = values.size();
  if (values.empty()) return a;
  a.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(a.n);
  if (a.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.sample_std = std::sqrt(ss / static_cast<double>(a.n - 1));
  }
  return a;
}

std::map<std::string, Aggregate> aggregate_seeds(const std::vector<MetricSet>& metric_sets) {
  std::map<std::string, std::vector<double>> columns;
  for (const auto& set : metric_sets)
    for (const auto& [name, value] : set) columns[name].push_back(value);
  std::map<std::string, Aggregate> out;
  for (const auto& [name, values] : columns) out[name] = aggregate(values);
  return out;
}

}  // namespace eval
}  // namespace mgtd
