#include "mgtd/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "mgtd/error.hpp"

namespace mgtd::eval {

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) return std::nullopt;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // positions i..j-1 hold ranks i+1..j
    const double r = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

namespace {

using Count = std::int64_t;

Count tied_pairs(const std::vector<double>& sorted) {
  Count t = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i + 1;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const auto run = static_cast<Count>(j - i);
    t += run * (run - 1) / 2;
    i = j;
  }
  return t;
}

// Merge sort counting inversions (strictly decreasing pairs).
Count sort_counting_swaps(std::vector<double>& v, std::vector<double>& scratch, std::size_t lo,
                          std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  Count swaps = sort_counting_swaps(v, scratch, lo, mid) + sort_counting_swaps(v, scratch, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<Count>(mid - i);
      scratch[k++] = v[j++];
    } else {
      scratch[k++] = v[i++];
    }
  }
  while (i < mid) scratch[k++] = v[i++];
  while (j < hi) scratch[k++] = v[j++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo), scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace

// Knight (1966): sort by (x, y), count discordances as inversions of y.
std::optional<double> kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) return std::nullopt;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x[order[i]];
    ys[i] = y[order[i]];
  }

  const Count n0 = static_cast<Count>(n) * static_cast<Count>(n - 1) / 2;
  const Count ties_x = tied_pairs(xs);
  Count ties_xy = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && xs[j] == xs[i] && ys[j] == ys[i]) ++j;
    const auto run = static_cast<Count>(j - i);
    ties_xy += run * (run - 1) / 2;
    i = j;
  }

  std::vector<double> scratch(n);
  const Count swaps = sort_counting_swaps(ys, scratch, 0, n);
  const Count ties_y = tied_pairs(ys);

  const Count denom_x = n0 - ties_x;
  const Count denom_y = n0 - ties_y;
  if (denom_x == 0 || denom_y == 0) return std::nullopt;
  const Count numerator = n0 - ties_x - ties_y + ties_xy - 2 * swaps;
  const double tau = static_cast<double>(numerator) /
                     std::sqrt(static_cast<double>(denom_x) * static_cast<double>(denom_y));
  return std::clamp(tau, -1.0, 1.0);
}

Correlations correlations(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw Error("correlations: inputs have different lengths (" + std::to_string(x.size()) +
                " vs " + std::to_string(y.size()) + ")");
  if (x.size() < 2) throw Error("correlations: need at least two points");
  return {pearson(x, y), spearman(x, y), kendall_tau_b(x, y)};
}

QualityCorrelation correlate_quality(const std::vector<Record>& records,
                                     const std::map<std::string, double>& scores_by_record) {
  QualityCorrelation out;
  std::vector<double> quality;
  std::vector<double> score;
  for (const auto& r : records) {
    auto it = scores_by_record.find(r.id);
    if (!r.translation_quality || it == scores_by_record.end()) {
      ++out.skipped;
      continue;
    }
    quality.push_back(static_cast<double>(*r.translation_quality));
    score.push_back(it->second);
  }
  out.used = quality.size();
  if (out.used < 2)
    throw Error("correlate_quality: " + std::to_string(out.used) +
                " record(s) carry both a translation quality and a score; need at least 2");
  out.coefficients = correlations(quality, score);
  return out;
}

}  // namespace mgtd::eval
