#pragma once

#include <cstdint>
#include <vector>

#include "weakmatch/tensor.hpp"

namespace weakmatch::nn {

struct SgdConfig {
  double learning_rate = 0.05;
  double momentum = 0.9;
};

/// SGD with heavy-ball momentum: v <- mu*v + g; p <- p - lr*v.
/// Non-trainable parameters are skipped.
class Sgd {
 public:
  Sgd(std::vector<Parameter*> params, SgdConfig config);

  void step();
  void zero_grad();
  std::uint64_t steps() const { return steps_; }
  const SgdConfig& config() const { return config_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }

 private:
  std::vector<Parameter*> params_;
  std::vector<Tensor> velocity_;
  SgdConfig config_;
  std::uint64_t steps_ = 0;
};

}  // namespace weakmatch::nn
