#include "doctest.h"

#include "weakmatch/error.hpp"
#include "weakmatch/tasks.hpp"

using namespace weakmatch;

TEST_CASE("binarization follows the auxiliary task table") {
  CHECK(binarize(0, {LabelSet::ac, 0}) == 0);
  CHECK(binarize(1, {LabelSet::ac, 0}) == 1);
  CHECK(binarize(1, {LabelSet::ac, 1}) == 0);
  CHECK(binarize(2, {LabelSet::ac, 1}) == 1);
  CHECK(binarize(3, {LabelSet::ac, 3}) == 0);
  CHECK(binarize(4, {LabelSet::ac, 3}) == 1);
  CHECK(binarize(5, {LabelSet::lp, 4}) == 1);
  CHECK(binarize(4, {LabelSet::lp, 4}) == 0);
  CHECK(main_label({0, 3}) == 0);
  CHECK(main_label({2, 0}) == 1);
}

TEST_CASE("binarization is monotone in the grade") {
  for (auto set : {LabelSet::ac, LabelSet::lp}) {
    for (int k = 0; k < max_label(set); ++k) {
      for (int v = 1; v <= max_label(set); ++v) {
        CHECK(binarize(v, {set, k}) >= binarize(v - 1, {set, k}));
      }
    }
  }
}

TEST_CASE("invalid grades and tasks are config errors") {
  CHECK_THROWS_AS(binarize(5, {LabelSet::ac, 0}), ConfigError);
  CHECK_THROWS_AS(binarize(-1, {LabelSet::lp, 0}), ConfigError);
  CHECK_THROWS_AS(binarize(1, {LabelSet::ac, 4}), ConfigError);
  CHECK_THROWS_AS(parse_label_set("xx"), ConfigError);
}

TEST_CASE("multi-task weights") {
  auto ac = TaskSet::multi_task({LabelSet::ac});
  REQUIRE(ac.size() == 4);
  CHECK(ac.tasks()[0].task.is_main());
  CHECK(ac.tasks()[0].weight == 0.5);
  for (std::size_t i = 1; i < 4; ++i) {
    CHECK(ac.tasks()[i].task.max_negative == static_cast<int>(i));
    CHECK(ac.tasks()[i].weight == doctest::Approx(0.5 / 3));
  }
  auto both = TaskSet::multi_task({LabelSet::ac, LabelSet::lp});
  REQUIRE(both.size() == 9);
  CHECK(both.tasks()[0].weight == 0.25);
  CHECK(both.tasks()[1].weight == 0.25);
  double total = 0.0;
  for (const auto& t : both.tasks()) total += t.weight;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
  for (std::size_t i = 2; i < 9; ++i) CHECK(both.tasks()[i].weight == doctest::Approx(0.5 / 7));
  CHECK(TaskSet::single_task().size() == 1);
  CHECK(TaskSet::single_task().tasks()[0].weight == 1.0);
}

TEST_CASE("malformed task sets are rejected") {
  CHECK_THROWS_AS(TaskSet({}), ConfigError);
  CHECK_THROWS_AS(TaskSet({{{LabelSet::ac, 1}, 1.0}}), ConfigError);
  CHECK_THROWS_AS(TaskSet({{{LabelSet::ac, 0}, 0.6}, {{LabelSet::ac, 1}, 0.4}}), ConfigError);
  CHECK_THROWS_AS(
      TaskSet({{{LabelSet::ac, 0}, 0.5}, {{LabelSet::ac, 1}, 0.3}, {{LabelSet::ac, 2}, 0.2}}),
      ConfigError);
  CHECK_THROWS_AS(TaskSet({{{LabelSet::ac, 0}, 0.5}, {{LabelSet::ac, 0}, 0.5}}), ConfigError);
}
