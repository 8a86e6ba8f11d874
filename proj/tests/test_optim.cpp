#include "doctest.h"

#include <cmath>

#include "weakmatch/optim.hpp"

using namespace weakmatch::nn;

TEST_CASE("one plain sgd step") {
  Parameter p("x", Tensor::scalar(5.0));
  p.grad = Tensor::scalar(1.0);
  Sgd opt({&p}, {0.1, 0.0});
  opt.step();
  CHECK(p.value[0] == doctest::Approx(4.9).epsilon(1e-15));
  CHECK(opt.steps() == 1);
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
  Parameter p("x", Tensor({3}, {1.0, -2.0, 3.0}));
  p.grad = Tensor({3}, {10.0, 20.0, -5.0});
  Sgd opt({&p}, {0.0, 0.9});
  for (int i = 0; i < 5; ++i) opt.step();
  CHECK(p.value == Tensor({3}, {1.0, -2.0, 3.0}));
}

TEST_CASE("quadratic bowl converges at the closed-form rate") {
  Parameter p("x", Tensor::scalar(1.0));
  Sgd opt({&p}, {0.1, 0.0});
  for (int i = 0; i < 100; ++i) {
    p.grad = Tensor::scalar(2.0 * p.value[0]);
    opt.step();
  }
  CHECK(std::abs(p.value[0]) < 1e-8);
  CHECK(p.value[0] == doctest::Approx(std::pow(0.8, 100)).epsilon(1e-9));
}

TEST_CASE("momentum accumulates velocity") {
  Parameter p("x", Tensor::scalar(0.0));
  Sgd opt({&p}, {1.0, 0.5});
  p.grad = Tensor::scalar(1.0);
  opt.step();  // v = 1
  opt.step();  // v = 1.5
  CHECK(p.value[0] == -2.5);
}

TEST_CASE("non-trainable parameters are skipped and zero_grad clears") {
  Parameter p("running", Tensor::scalar(2.0), false);
  p.grad = Tensor::scalar(1.0);
  Sgd opt({&p}, {0.1, 0.0});
  opt.step();
  CHECK(p.value[0] == 2.0);
  opt.zero_grad();
  CHECK(p.grad[0] == 0.0);
}
