#include "doctest.h"
#include "gradient_cases.hpp"

#include <cmath>

#include "weakmatch/checkpoint.hpp"
#include "weakmatch/error.hpp"
#include "weakmatch/models.hpp"
#include "weakmatch/retrieval.hpp"

using namespace weakmatch;
using namespace weakmatch::nn;

TEST_CASE("dense with identity weights and zero bias is the identity") {
  Dense d("d", 3, 3, 1);
  d.weight().value = Tensor({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  d.bias().value = Tensor({3}, 0.0);
  Tape t;
  Tensor x({2, 3}, {1, -2, 3, 0.5, 0, 7});
  CHECK(t.value(d.forward(t, t.leaf(x))) == x);
}

TEST_CASE("max-pool of a single-word sequence is that word") {
  Tape t;
  Tensor x({1, 4}, {0.1, -0.3, 2.0, 0.0});
  CHECK(t.value(segment_max(t, t.leaf(x), {0, 1})) == x);
}

TEST_CASE("residual unit with zero inner weights is the identity") {
  for (bool bn : {true, false}) {
    ResidualUnit r("r", 3, 2, bn);
    r.inner2().weight().value.fill(0.0);
    r.inner2().bias().value.fill(0.0);
    Tape t;
    Tensor x({2, 3}, {1, -2, 3, 0.5, 0, 7});
    CHECK(t.value(r.forward(t, t.leaf(x), true)) == x);
  }
}

TEST_CASE("gradient of a sum through an identity graph is all ones") {
  Tape t;
  auto x = t.leaf(Tensor({2, 3}, {1, 2, 3, 4, 5, 6}), true);
  t.backward(sum(t, affine(t, x, 1.0, 0.0)));
  CHECK(t.grad(x) == Tensor({2, 3}, 1.0));
}

TEST_CASE("cdssm encodings are unit vectors and the towers are untied") {
  CdssmModel m(9, {6, 5}, 3);
  std::vector<EncodedPair> pairs;
  for (std::uint64_t s = 0; s < 20; ++s) pairs.push_back(gradcheck::encoded_pair(s, 9));
  // An entirely empty pair encodes a padding word on both sides.
  pairs.push_back(EncodedPair{});
  std::vector<const FieldSequences*> f;
  for (const auto& p : pairs) f.push_back(&p.fields);
  for (Side side : {Side::query, Side::ad}) {
    auto e = m.encode_fields(side, f);
    for (std::size_t r = 0; r < e.rows(); ++r) {
      double n = 0.0;
      for (std::size_t c = 0; c < e.cols(); ++c) n += e.at(r, c) * e.at(r, c);
      CHECK(std::abs(std::sqrt(n) - 1.0) <= 1e-12);
    }
  }
  CHECK(m.encode_fields(Side::query, f) == m.encode_fields(Side::query, f));
  auto params = m.parameters();
  bool differ = false;
  for (std::size_t i = 0; i < params.size() / 2; ++i) {
    differ = differ || !(params[i]->value == params[i + params.size() / 2]->value);
  }
  CHECK(differ);
}

TEST_CASE("score map at the cosine extremes") {
  const std::vector<double> q{0.6, 0.8};
  const std::vector<double> minus{-0.6, -0.8};
  const std::vector<double> ortho{-0.8, 0.6};
  CHECK(dictionary_score(q, q) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(dictionary_score(q, minus) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(dictionary_score(q, ortho) == 0.5);
  CHECK(cosine_to_score(1.0000000000000002) == 1.0);
}

TEST_CASE("pairwise scores equal scores of independently encoded vectors") {
  CdssmModel m(9, {6, 5}, 4);
  std::vector<EncodedPair> pairs;
  for (std::uint64_t s = 0; s < 50; ++s) pairs.push_back(gradcheck::encoded_pair(200 + s, 9));
  auto scores = m.score_pairs(pairs, 7);
  std::vector<const FieldSequences*> f;
  for (const auto& p : pairs) f.push_back(&p.fields);
  auto qv = m.encode_fields(Side::query, f, 3);
  auto av = m.encode_fields(Side::ad, f, 11);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double s = dictionary_score({qv.data() + i * qv.cols(), qv.cols()},
                                      {av.data() + i * av.cols(), av.cols()});
    CHECK(std::abs(s - scores[i]) <= 1e-12);
  }
}

TEST_CASE("composite score") {
  auto ac = TaskSet::multi_task({LabelSet::ac});
  std::vector<double> same(4, 0.6);
  CHECK(composite_score(same, ac) == doctest::Approx(0.6).epsilon(1e-15));
  std::vector<double> mixed{0.9, 0.3, 0.3, 0.3};
  CHECK(composite_score(mixed, ac) == doctest::Approx(0.6).epsilon(1e-15));
  auto single = TaskSet::single_task();
  std::vector<double> one{0.42};
  CHECK(composite_score(one, single) == 0.42);
}

TEST_CASE("multi-task loss") {
  auto single = TaskSet::single_task();
  Tape t;
  auto p = t.leaf(Tensor({2, 1}, {0.7, 0.2}));
  const double want = (cross_entropy_value(0.7, 1) + cross_entropy_value(0.2, 0)) / 2.0;
  CHECK(t.value(mtl_loss(t, p, {1, 0}, single))[0] == doctest::Approx(want).epsilon(1e-14));

  auto ac = TaskSet::multi_task({LabelSet::ac});
  auto perfect = t.leaf(Tensor({1, 4}, {1.0, 1.0, 0.0, 0.0}));
  CHECK(t.value(mtl_loss(t, perfect, {1, 1, 0, 0}, ac))[0] < 1e-6);
  CHECK_THROWS_AS(mtl_loss(t, perfect, {1, 1, 0}, ac), RuntimeError);

  std::vector<GradedLabel> labels{{2, 5}};
  CHECK(task_labels(labels, ac) == std::vector<double>{1, 1, 0, 0});
}

TEST_CASE("deep crossing outputs one probability per task and round-trips") {
  auto tasks = TaskSet::multi_task({LabelSet::ac, LabelSet::lp});
  DeepCrossingModel m(9, {4, 2, true}, tasks, 5);
  std::vector<EncodedPair> pairs;
  for (std::uint64_t s = 0; s < 10; ++s) pairs.push_back(gradcheck::encoded_pair(300 + s, 9));
  auto out = m.predict(pairs);
  CHECK(out.probabilities.rows() == 10);
  CHECK(out.probabilities.cols() == tasks.size());
  for (std::size_t r = 0; r < 10; ++r) {
    std::span<const double> row{out.probabilities.data() + r * tasks.size(), tasks.size()};
    CHECK(out.composite[r] == composite_score(row, tasks));
  }
  auto back = DeepCrossingModel::from_checkpoint(m.to_checkpoint());
  CHECK(back.predict(pairs).composite == out.composite);
}

TEST_CASE("cdssm checkpoints round-trip") {
  CdssmModel m(9, {6, 5}, 8);
  auto path = std::filesystem::temp_directory_path() / "weakmatch-test-cdssm.ckpt";
  save_checkpoint(path, m.to_checkpoint());
  auto back = CdssmModel::from_checkpoint(load_checkpoint(path));
  CHECK(back.fingerprint() == m.fingerprint());
  CHECK(back.config().conv_channels == 6);
  std::vector<EncodedPair> pairs{gradcheck::encoded_pair(1, 9)};
  CHECK(back.score_pairs(pairs) == m.score_pairs(pairs));
  CHECK_THROWS_AS(CdssmModel(0, {6, 5}, 1), ConfigError);
}
