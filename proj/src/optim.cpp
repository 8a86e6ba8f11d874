#include "weakmatch/optim.hpp"

#include "weakmatch/error.hpp"

namespace weakmatch::nn {

Sgd::Sgd(std::vector<Parameter*> params, SgdConfig config)
    : params_(std::move(params)), config_(config) {
  velocity_.reserve(params_.size());
  for (auto* p : params_) velocity_.emplace_back(p->value.shape(), 0.0);
}

void Sgd::step() {
  const double lr = config_.learning_rate, mu = config_.momentum;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Parameter& p = *params_[k];
    if (!p.trainable) continue;
    if (!p.grad.same_shape(p.value)) throw RuntimeError("sgd: gradient shape mismatch for " + p.name);
    Tensor& v = velocity_[k];
    double* pv = p.value.data();
    const double* g = p.grad.data();
    double* vv = v.data();
    const std::size_t n = p.value.size();
    if (mu == 0.0) {
      for (std::size_t i = 0; i < n; ++i) pv[i] -= lr * g[i];
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        vv[i] = mu * vv[i] + g[i];
        pv[i] -= lr * vv[i];
      }
    }
  }
  ++steps_;
}

void Sgd::zero_grad() {
  for (auto* p : params_) p->zero_grad();
}

}  // namespace weakmatch::nn
