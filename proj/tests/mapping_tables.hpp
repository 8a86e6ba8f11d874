#pragma once

// Literal truth tables for the target, weight and label-aware functions, and
// the theta = 1 equivalence with the soft loss. Each check returns a list of
// mismatch descriptions, empty on success.

#include <cmath>
#include <string>
#include <vector>

#include "weakmatch/distill.hpp"
#include "weakmatch/rng.hpp"

namespace tables {

struct MappingRow {
  double s;
  double f1, f2;
  double g1, g2, g2_p1, g3;
};

// t1 = 0.4, t2 = 0.6, p = 2 unless noted. Boundary scores sit exactly on t1,
// t2 and the f1 threshold.
inline const std::vector<MappingRow>& mapping_rows() {
  static const std::vector<MappingRow> rows{
      // s      f1   f2      g1   g2        g2(p=1)  g3
      {0.0,     0.0, 0.0,    1.0, 1.0,      1.0,     1.0},
      {0.125,   0.0, 0.125,  1.0, 0.5625,   0.75,    1.0},
      {0.25,    0.0, 0.25,   1.0, 0.25,     0.5,     1.0},
      {0.4,     0.0, 0.4,    1.0, 0.04,     0.2,     1.0},
      {0.4375,  0.0, 0.4375, 0.0, 0.015625, 0.125,   1.0},
      {0.5,     1.0, 0.5,    0.0, 0.0,      0.0,     1.0},
      {0.5625,  1.0, 0.5625, 0.0, 0.015625, 0.125,   1.0},
      {0.6,     1.0, 0.6,    1.0, 0.04,     0.2,     1.0},
      {0.75,    1.0, 0.75,   1.0, 0.25,     0.5,     1.0},
      {1.0,     1.0, 1.0,    1.0, 1.0,      1.0,     1.0},
  };
  return rows;
}

struct LabelAwareRow {
  int ytilde;
  double y, yhat;
  double weight_over_theta;  // weight is theta when 1, else 1
};

inline const std::vector<LabelAwareRow>& label_aware_rows() {
  static const std::vector<LabelAwareRow> rows{
      {1, 0.6, 0.8, 1},  // positive, over-predicted
      {1, 0.6, 0.6, 1},  // positive, exact (y - yhat = 0 counts as over)
      {1, 0.6, 0.3, 0},  // positive, under-predicted
      {0, 0.2, 0.5, 0},  // negative, over-predicted
      {0, 0.2, 0.2, 0},  // negative, exact
      {0, 0.2, 0.1, 1},  // negative, under-predicted
  };
  return rows;
}

inline constexpr double thetas[] = {0.0, 0.2, 0.5, 0.8, 1.0};

// Non-dyadic rows (0.4, 0.6 under g2) carry one rounding of 2s - 1.
inline constexpr double kTableTolerance = 1e-15;

inline std::vector<std::string> check_mapping_tables() {
  using namespace weakmatch;
  std::vector<std::string> bad;
  auto expect = [&](const char* fn, double s, double got, double want) {
    if (!(std::abs(got - want) <= kTableTolerance)) {
      bad.push_back(std::string(fn) + "(" + std::to_string(s) + ") = " + std::to_string(got) +
                    ", want " + std::to_string(want));
    }
  };
  MappingConfig f1g1 = MappingConfig::parse("f1:g1");
  MappingConfig f2g2 = MappingConfig::parse("f2:g2");
  MappingConfig f2g2p1 = f2g2;
  f2g2p1.p = 1.0;
  MappingConfig f2g3 = MappingConfig::parse("f2:g3");
  for (const auto& r : mapping_rows()) {
    expect("f1", r.s, map_target(r.s, f1g1), r.f1);
    expect("f2", r.s, map_target(r.s, f2g3), r.f2);
    expect("g1", r.s, map_weight(r.s, f1g1), r.g1);
    expect("g2", r.s, map_weight(r.s, f2g2), r.g2);
    expect("g2[p=1]", r.s, map_weight(r.s, f2g2p1), r.g2_p1);
    expect("g3", r.s, map_weight(r.s, f2g3), r.g3);
  }
  return bad;
}

inline std::vector<std::string> check_label_aware_table() {
  using namespace weakmatch;
  std::vector<std::string> bad;
  for (double theta : thetas) {
    if (delta_theta(-0.1, theta) != theta || delta_theta(0.0, theta) != theta ||
        delta_theta(0.1, theta) != 1.0) {
      bad.push_back("delta at theta " + std::to_string(theta));
    }
    for (const auto& r : label_aware_rows()) {
      const double want = r.weight_over_theta == 1 ? theta : 1.0;
      const double got = label_aware_weight(r.y, r.yhat, r.ytilde, theta);
      // The weight only ever takes the values theta and 1.
      if (got != want || (got != theta && got != 1.0)) {
        bad.push_back("label-aware(ytilde=" + std::to_string(r.ytilde) + ", y=" +
                      std::to_string(r.y) + ", yhat=" + std::to_string(r.yhat) + ", theta=" +
                      std::to_string(theta) + ") = " + std::to_string(got));
      }
    }
  }
  return bad;
}

/// Largest |label-aware(theta = 1) - soft| over random batches.
inline double theta_one_soft_gap(std::size_t batches = 200) {
  using namespace weakmatch;
  Rng rng(derive_seed(5, "theta-one"));
  double worst = 0.0;
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t n = 1 + rng.index(64);
    std::vector<double> yhat(n);
    std::vector<double> y(n);
    std::vector<int> yt(n);
    for (std::size_t i = 0; i < n; ++i) {
      yhat[i] = rng.uniform(0.001, 0.999);
      y[i] = rng.uniform();
      yt[i] = rng.bernoulli(0.5) ? 1 : 0;
    }
    auto loss = [&](FinetuneMode mode) {
      nn::Tape t;
      auto v = t.leaf(nn::Tensor({n, 1}, yhat));
      return t.value(finetune_loss(t, v, y, yt, mode, 1.0))[0];
    };
    worst = std::max(worst, std::abs(loss(FinetuneMode::label_aware) - loss(FinetuneMode::soft)));
  }
  return worst;
}

}  // namespace tables
