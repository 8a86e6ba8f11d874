#pragma once

// Quadratic reference implementations of the ranking metrics, and the tied
// instances they are compared on.

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "weakmatch/rng.hpp"

namespace oracle {

/// Mean over all (positive, negative) pairs of [p > n] + 0.5 [p == n].
inline double roc_auc_pairs(std::span<const double> s, std::span<const int> y) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      if (s[i] > s[j]) {
        wins += 1.0;
      } else if (s[i] == s[j]) {
        wins += 0.5;
      }
    }
  }
  return wins / pairs;
}

/// For each positive, precision over every item scoring at least as high;
/// averaged over positives.
inline double pr_auc_thresholds(std::span<const double> s, std::span<const int> y) {
  double total = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    ++positives;
    double above = 0.0;
    double above_pos = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (s[j] >= s[i]) {
        above += 1.0;
        above_pos += y[j];
      }
    }
    total += above_pos / above;
  }
  return total / static_cast<double>(positives);
}

struct Instance {
  std::vector<double> scores;
  std::vector<int> labels;
};

/// Instance k of a reproducible family: sizes up to 2000, score grids as
/// coarse as 3 levels so ties are common, and both classes present.
inline Instance tied_instance(std::size_t k) {
  weakmatch::Rng rng(weakmatch::derive_seed(k, "auc-instance"));
  Instance inst;
  const std::size_t n = 2 + rng.index(1999);
  const std::size_t levels = 3 + rng.index(k % 3 == 0 ? 8 : 500);
  const double base_rate = rng.uniform(0.05, 0.95);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = rng.bernoulli(base_rate) ? 1 : 0;
    // Positives drawn slightly higher so the AUC is not always near 0.5.
    const double u = std::min(rng.uniform() + 0.2 * y, 0.999999);
    inst.scores.push_back(static_cast<double>(static_cast<std::size_t>(u * levels)) / levels);
    inst.labels.push_back(y);
  }
  inst.labels[0] = 1;
  inst.labels[1] = 0;
  return inst;
}

}  // namespace oracle
