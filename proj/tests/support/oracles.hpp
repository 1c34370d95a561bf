#pragma once

// Brute-force reference implementations for cross-checking the library.

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mgtd/corpus.hpp"

namespace oracle {

struct Counts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

inline Counts confusion(const std::vector<mgtd::Label>& pred, const std::vector<mgtd::Label>& gold) {
  Counts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] == mgtd::Label::Machine;
    const bool g = gold[i] == mgtd::Label::Machine;
    if (p && g) ++c.tp;
    else if (p && !g) ++c.fp;
    else if (!p && g) ++c.fn;
    else ++c.tn;
  }
  return c;
}

struct Prf {
  double precision, recall, f1;
};

// 0/0 taken as 0.
inline Prf prf(double tp, double fp, double fn) {
  const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  return {p, r, f};
}

// O(n^2) pair enumeration; nullopt when either variable is constant.
inline std::optional<double> kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  long double concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0) ties_x += 1;
      if (dy == 0) ties_y += 1;
      if (dx == 0 || dy == 0) continue;
      if ((dx > 0) == (dy > 0)) concordant += 1;
      else discordant += 1;
    }
  const long double n0 = static_cast<long double>(n) * (n - 1) / 2;
  const long double denom = (n0 - ties_x) * (n0 - ties_y);
  if (denom <= 0) return std::nullopt;
  return static_cast<double>((concordant - discordant) / std::sqrt(denom));
}

inline std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::nullopt;
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

// Rank = 1 + #smaller + (#equal - 1) / 2, counted pairwise.
inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) {
      if (w < v[i]) less += 1;
      if (w == v[i]) equal += 1;
    }
    r[i] = 1 + less + (equal - 1) / 2;
  }
  return r;
}

inline std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(ranks(x), ranks(y));
}

// Unhashed n-gram multiset over code points (char) or whitespace tokens (word).
inline std::map<std::u32string, int> char_ngrams(const std::u32string& s, int lo, int hi) {
  std::map<std::u32string, int> out;
  for (int n = lo; n <= hi; ++n)
    for (std::size_t i = 0; i + n <= s.size(); ++i) ++out[s.substr(i, n)];
  return out;
}

}  // namespace oracle
