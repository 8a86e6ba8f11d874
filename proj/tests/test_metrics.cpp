#include "doctest.h"
#include "auc_oracles.hpp"

#include <cmath>

#include "weakmatch/error.hpp"
#include "weakmatch/metrics.hpp"

using namespace weakmatch;

TEST_CASE("roc and pr auc match the quadratic oracles on tied instances") {
  for (std::size_t k = 0; k < 50; ++k) {
    auto inst = oracle::tied_instance(k);
    INFO("instance ", k, " n=", inst.scores.size());
    CHECK(std::abs(roc_auc(inst.scores, inst.labels) -
                   oracle::roc_auc_pairs(inst.scores, inst.labels)) <= 1e-9);
    CHECK(std::abs(pr_auc(inst.scores, inst.labels) -
                   oracle::pr_auc_thresholds(inst.scores, inst.labels)) <= 1e-9);
  }
}

TEST_CASE("small hand-computed values") {
  const std::vector<double> s{0.9, 0.8, 0.8, 0.1};
  const std::vector<int> y{1, 0, 1, 0};
  // Pairs: (0.9>0.8), (0.9>0.1), (0.8=0.8), (0.8>0.1) -> 3.5 / 4.
  CHECK(roc_auc(s, y) == 0.875);
  // Positive at 0.9: 1/1. Positive at 0.8: 2 of 3 items at or above.
  CHECK(pr_auc(s, y) == doctest::Approx((1.0 + 2.0 / 3.0) / 2.0).epsilon(1e-15));
}

TEST_CASE("all scores tied gives chance auc") {
  const std::vector<double> s(10, 0.3);
  const std::vector<int> y{1, 0, 1, 0, 0, 0, 1, 0, 0, 0};
  CHECK(roc_auc(s, y) == 0.5);
  CHECK(pr_auc(s, y) == doctest::Approx(0.3));
}

TEST_CASE("roc auc is invariant to strictly increasing transforms") {
  auto inst = oracle::tied_instance(7);
  std::vector<double> t;
  for (double v : inst.scores) t.push_back(std::exp(3.0 * v) - 10.0);
  CHECK(roc_auc(t, inst.labels) == roc_auc(inst.scores, inst.labels));
  CHECK(pr_auc(t, inst.labels) == pr_auc(inst.scores, inst.labels));
}

TEST_CASE("flipping scores complements roc auc") {
  for (std::size_t k = 0; k < 10; ++k) {
    auto inst = oracle::tied_instance(k);
    std::vector<double> neg;
    for (double v : inst.scores) neg.push_back(-v);
    CHECK(roc_auc(neg, inst.labels) ==
          doctest::Approx(1.0 - roc_auc(inst.scores, inst.labels)).epsilon(1e-12));
  }
}

TEST_CASE("degenerate label sets are errors") {
  const std::vector<double> s{0.1, 0.2};
  CHECK_THROWS_AS(roc_auc(s, std::vector<int>{1, 1}), RuntimeError);
  CHECK_THROWS_AS(roc_auc(s, std::vector<int>{0, 0}), RuntimeError);
  CHECK_THROWS_AS(pr_auc(s, std::vector<int>{0, 0}), RuntimeError);
  CHECK_THROWS_AS(roc_auc(s, std::vector<int>{1}), RuntimeError);
}

TEST_CASE("reports round-trip through json and omit timing by default") {
  auto r = evaluate("m", std::vector<double>{0.2, 0.7}, std::vector<int>{0, 1});
  r.seed = 3;
  r.config_hash = "abc";
  r.tags["rho"] = "0.5";
  r.wall_clock_seconds = 1.5;
  auto j = r.to_json();
  CHECK_FALSE(j.contains("wall_clock_seconds"));
  CHECK(r.to_json(true).contains("wall_clock_seconds"));
  auto back = MetricsReport::from_json(j);
  CHECK(back.name == "m");
  CHECK(back.roc_auc == 1.0);
  CHECK(back.sizes.at("eval") == 2);
  CHECK(back.tags == r.tags);
}

TEST_CASE("sweeps require ascending numeric axes") {
  SweepResult sweep{"rho", {}};
  sweep.points.push_back({0.2, "", {}});
  sweep.points.push_back({0.1, "", {}});
  CHECK_THROWS_AS(sweep.check_sorted(), RuntimeError);
  std::swap(sweep.points[0], sweep.points[1]);
  CHECK_NOTHROW(sweep.check_sorted());
  CHECK(sweep.render_dat().rfind("# rho", 0) == 0);
}
