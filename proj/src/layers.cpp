#include "weakmatch/layers.hpp"

#include <cmath>

#include "weakmatch/rng.hpp"

namespace weakmatch::nn {

const char* layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::dense: return "dense";
    case LayerKind::conv1d_words: return "conv1d-over-words";
    case LayerKind::maxpool_words: return "maxpool-over-words";
    case LayerKind::tanh: return "tanh";
    case LayerKind::relu: return "relu";
    case LayerKind::sigmoid: return "sigmoid";
    case LayerKind::batchnorm: return "batchnorm";
    case LayerKind::residual_unit: return "residual-unit";
    case LayerKind::embedding_sum: return "embedding-sum";
  }
  return "unknown";
}

Tensor glorot_uniform(std::vector<std::size_t> shape, std::size_t fan_in, std::size_t fan_out,
                      std::uint64_t seed) {
  Tensor t(std::move(shape));
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Rng rng(seed);
  for (auto& v : t.values()) v = rng.uniform(-limit, limit);
  return t;
}

Dense::Dense(const std::string& name, std::size_t in, std::size_t out, std::uint64_t seed)
    : weight_(name + ".weight", glorot_uniform({in, out}, in, out, derive_seed(seed, name))),
      bias_(name + ".bias", Tensor({out})) {}

WordConv::WordConv(const std::string& name, std::size_t vocab, std::size_t channels,
                   std::uint64_t seed)
    : bias_(name + ".bias", Tensor({channels})) {
  for (std::size_t k = 0; k < kWindow; ++k) {
    const std::string n = name + ".weight" + std::to_string(k);
    weights_[k] = Parameter(
        n, glorot_uniform({vocab, channels}, kWindow * vocab, channels, derive_seed(seed, n)));
  }
}

Var WordConv::forward(Tape& t, WordBatch x) {
  std::array<Parameter*, kWindow> ws{};
  for (std::size_t k = 0; k < kWindow; ++k) ws[k] = &weights_[k];
  return word_conv(t, std::move(x), ws, bias_);
}

void WordConv::collect(std::vector<Parameter*>& out) {
  for (auto& w : weights_) out.push_back(&w);
  out.push_back(&bias_);
}

EmbeddingSum::EmbeddingSum(const std::string& name, std::size_t vocab, std::size_t dim,
                           std::uint64_t seed)
    : weight_(name + ".weight", glorot_uniform({vocab, dim}, vocab, dim, derive_seed(seed, name))),
      bias_(name + ".bias", Tensor({dim})) {}

BatchNorm::BatchNorm(const std::string& name, std::size_t width)
    : gamma_(name + ".gamma", Tensor({width}, 1.0)),
      beta_(name + ".beta", Tensor({width})),
      mean_(name + ".running_mean", Tensor({width}), false),
      var_(name + ".running_var", Tensor({width}, 1.0), false) {}

ResidualUnit::ResidualUnit(const std::string& name, std::size_t width, std::uint64_t seed,
                           bool use_batchnorm)
    : inner1_(name + ".inner1", width, width, seed),
      inner2_(name + ".inner2", width, width, seed),
      bn_(name + ".bn", width),
      use_bn_(use_batchnorm) {}

Var ResidualUnit::forward(Tape& t, Var x, bool training) {
  Var h = inner1_.forward(t, x);
  if (use_bn_) h = bn_.forward(t, h, training);
  h = relu(t, h);
  h = inner2_.forward(t, h);
  return add(t, x, h);
}

void ResidualUnit::collect(std::vector<Parameter*>& out) {
  inner1_.collect(out);
  if (use_bn_) bn_.collect(out);
  inner2_.collect(out);
}

}  // namespace weakmatch::nn
