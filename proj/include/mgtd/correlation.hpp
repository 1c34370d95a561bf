#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mgtd/corpus.hpp"

namespace mgtd {

/// A coefficient is empty when undefined (one of the inputs is constant).
struct Correlations {
  std::optional<double> pearson;
  std::optional<double> spearman;
  std::optional<double> kendall_tau_b;
};

struct QualityCorrelation {
  Correlations coefficients;
  std::size_t used = 0;
  std::size_t skipped = 0;  // no translation_quality or no score
};

namespace eval {

std::optional<double> pearson(std::span<const double> x, std::span<const double> y);
/// Pearson on average ranks.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);
/// Tau-b with tie correction in both variables, O(n log n).
std::optional<double> kendall_tau_b(std::span<const double> x, std::span<const double> y);

/// 1-based ranks; tied values share the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

/// Throws Error when lengths differ or fewer than two points are given.
Correlations correlations(std::span<const double> x, std::span<const double> y);

/// Correlates translation quality with a per-record detector score.
/// Throws Error with fewer than two usable records.
QualityCorrelation correlate_quality(const std::vector<Record>& records,
                                     const std::map<std::string, double>& scores_by_record);

}  // namespace eval
}  // namespace mgtd
