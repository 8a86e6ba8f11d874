#include "doctest.h"
#include "gradient_cases.hpp"

#include "weakmatch/error.hpp"
#include "weakmatch/layers.hpp"

using namespace weakmatch;
using namespace weakmatch::nn;

TEST_CASE("finite differences agree with backprop for every op, layer and loss") {
  gradcheck::Fixtures fixtures;
  auto cases = gradcheck::cases(fixtures);
  for (auto& c : cases) {
    auto r = gradcheck::run(c);
    INFO(r.name, " max relative error ", r.max_rel_error);
    CHECK(r.checked > 0);
    CHECK(r.max_rel_error < 1e-4);
  }
}

TEST_CASE("every layer kind has a gradient case") {
  gradcheck::Fixtures fixtures;
  auto cases = gradcheck::cases(fixtures);
  auto has = [&](const std::string& name) {
    for (const auto& c : cases) {
      if (c.name == name) return true;
    }
    return false;
  };
  for (auto kind : {LayerKind::dense, LayerKind::conv1d_words, LayerKind::maxpool_words,
                    LayerKind::tanh, LayerKind::relu, LayerKind::sigmoid, LayerKind::batchnorm,
                    LayerKind::residual_unit, LayerKind::embedding_sum}) {
    CHECK_MESSAGE(has(layer_kind_name(kind)), layer_kind_name(kind));
  }
  for (const char* loss : {"cross-entropy", "weighted-mse", "label-aware-theta-0.5"}) {
    CHECK_MESSAGE(has(loss), loss);
  }
}

TEST_CASE("linear forward matches a hand computation") {
  Parameter w("w", Tensor({2, 2}, {1.0, 2.0, 3.0, 4.0}));
  Parameter b("b", Tensor({2}, {0.5, -0.5}));
  Tape t;
  auto x = t.leaf(Tensor({1, 2}, {1.0, 1.0}));
  auto y = linear(t, x, w, b);
  CHECK(t.value(y)[0] == 4.5);
  CHECK(t.value(y)[1] == 5.5);
}

TEST_CASE("leaf gradients accumulate until zeroed") {
  Parameter w("w", Tensor({1, 1}, {2.0}));
  Parameter b("b", Tensor({1}, {0.0}));
  w.zero_grad();
  b.zero_grad();
  for (int i = 0; i < 2; ++i) {
    Tape t;
    auto x = t.leaf(Tensor({1, 1}, {3.0}));
    t.backward(sum(t, linear(t, x, w, b)));
  }
  CHECK(w.grad[0] == 6.0);
  w.zero_grad();
  CHECK(w.grad[0] == 0.0);
}

TEST_CASE("zero rows normalize to a fixed unit vector and non-finite values are rejected") {
  Tape t;
  auto x = t.leaf(Tensor({1, 1}, {0.0}));
  auto y = l2_normalize_rows(t, x);
  CHECK(t.value(y)[0] == 1.0);
  CHECK_THROWS_AS(t.leaf(Tensor({1, 1}, {std::nan("")})), RuntimeError);
  auto big = t.leaf(Tensor({1, 1}, {1e308}));
  CHECK_THROWS_AS(affine(t, big, 10.0, 0.0), RuntimeError);
}

TEST_CASE("batchnorm defaults and running statistics") {
  BatchNorm bn("bn", 2);
  CHECK(bn.gamma().value == Tensor({2}, 1.0));
  CHECK(bn.beta().value == Tensor({2}, 0.0));
  CHECK_FALSE(bn.running_mean().trainable);
  Tape t;
  auto x = t.leaf(Tensor({2, 2}, {1.0, 2.0, 3.0, 6.0}));
  auto y = bn.forward(t, x, true);
  // Normalized columns: (x - mean) / sqrt(var + eps) with biased variance.
  CHECK(t.value(y)[0] == doctest::Approx(-1.0 / std::sqrt(1.0 + 1e-5)).epsilon(1e-12));
  CHECK(bn.running_mean().value[0] == doctest::Approx(0.99 * 0.0 + 0.01 * 2.0));
  CHECK(bn.running_mean().value[1] == doctest::Approx(0.01 * 4.0));
}

TEST_CASE("glorot init stays inside its bound") {
  auto w = glorot_uniform({30, 20}, 30, 20, 7);
  const double bound = std::sqrt(6.0 / 50.0);
  for (double v : w.values()) CHECK(std::abs(v) <= bound);
  CHECK(w == glorot_uniform({30, 20}, 30, 20, 7));
}

TEST_CASE("word convolution zero-pads at sequence edges") {
  WordConv conv("c", 2, 1, 3);
  for (std::size_t k = 0; k < 3; ++k) conv.weights()[k].value = Tensor({2, 1}, {double(k + 1), 0.0});
  conv.bias().value = Tensor({1}, {0.0});
  WordBatch wb;
  const std::uint32_t idx[] = {0};
  const double one[] = {1.0};
  wb.words.add_row(idx, one);
  wb.end_sequence();
  wb.words.add_row(idx, one);
  wb.words.add_row(idx, one);
  wb.end_sequence();
  Tape t;
  auto y = conv.forward(t, wb);
  // Single-word sequence sees only the centre tap; in the pair each word sees one neighbour.
  CHECK(t.value(y)[0] == 2.0);
  CHECK(t.value(y)[1] == 2.0 + 3.0);
  CHECK(t.value(y)[2] == 1.0 + 2.0);
}
