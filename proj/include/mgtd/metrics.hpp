#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mgtd/corpus.hpp"

namespace mgtd {

/// Counts with Machine as the positive class.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  /// (tp + tn) / total, 0 for an empty matrix.
  double accuracy() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  /// Set when any of the three came from a 0/0 and was reported as 0.
  bool undefined = false;
};

/// Metric name -> value for one model on one evaluation set.
using MetricSet = std::map<std::string, double>;

struct Aggregate {
  double mean = 0.0;
  double sample_std = 0.0;  // n-1 denominator; 0 when n == 1
  std::size_t n = 0;
};

namespace eval {

/// Throws Error on length mismatch or empty input.
ConfusionMatrix confusion(std::span<const Label> predictions, std::span<const Label> gold);

ClassScores prf1(const ConfusionMatrix& cm, Label positive_class = Label::Machine);

/// Harmonic mean, 0 when both are 0.
double f1_score(double precision, double recall);

double macro_f1(const ConfusionMatrix& cm);

/// accuracy, macro_f1, {machine,human}_{precision,recall,f1}.
MetricSet metric_set(const ConfusionMatrix& cm);

/// Mean and sample standard deviation of every metric name; a name missing from
/// some sets is aggregated over the sets that carry it.
std::map<std::string, Aggregate> aggregate_seeds(const std::vector<MetricSet>& metric_sets);

Aggregate aggregate(std::span<const double> values);

}  // namespace eval
}  // namespace mgtd
