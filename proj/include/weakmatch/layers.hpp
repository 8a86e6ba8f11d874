#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "weakmatch/tensor.hpp"

namespace weakmatch::nn {

enum class LayerKind {
  dense,
  conv1d_words,
  maxpool_words,
  tanh,
  relu,
  sigmoid,
  batchnorm,
  residual_unit,
  embedding_sum,
};

const char* layer_kind_name(LayerKind kind);

struct LayerSpec {
  LayerKind kind = LayerKind::dense;
  std::size_t in = 0;
  std::size_t out = 0;
  std::uint64_t seed = 0;
};

/// Glorot-uniform fill: U(-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))).
Tensor glorot_uniform(std::vector<std::size_t> shape, std::size_t fan_in, std::size_t fan_out,
                      std::uint64_t seed);

class Dense {
 public:
  Dense() = default;
  Dense(const std::string& name, std::size_t in, std::size_t out, std::uint64_t seed);

  Var forward(Tape& t, Var x) { return linear(t, x, weight_, bias_); }
  void collect(std::vector<Parameter*>& out) { out.insert(out.end(), {&weight_, &bias_}); }

  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }
  std::size_t in() const { return weight_.value.shape()[0]; }
  std::size_t out() const { return weight_.value.shape()[1]; }

 private:
  Parameter weight_;
  Parameter bias_;
};

/// Word-window convolution over letter-trigram count vectors.
class WordConv {
 public:
  static constexpr std::size_t kWindow = 3;

  WordConv() = default;
  WordConv(const std::string& name, std::size_t vocab, std::size_t channels, std::uint64_t seed);

  Var forward(Tape& t, WordBatch x);
  void collect(std::vector<Parameter*>& out);

  std::size_t vocab() const { return weights_[0].value.shape()[0]; }
  std::size_t channels() const { return weights_[0].value.shape()[1]; }
  std::array<Parameter, kWindow>& weights() { return weights_; }
  Parameter& bias() { return bias_; }

 private:
  std::array<Parameter, kWindow> weights_;
  Parameter bias_;
};

/// Dense projection of summed sparse trigram counts.
class EmbeddingSum {
 public:
  EmbeddingSum() = default;
  EmbeddingSum(const std::string& name, std::size_t vocab, std::size_t dim, std::uint64_t seed);

  Var forward(Tape& t, SparseRows x) { return embedding_sum(t, std::move(x), weight_, bias_); }
  void collect(std::vector<Parameter*>& out) { out.insert(out.end(), {&weight_, &bias_}); }

  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }

 private:
  Parameter weight_;
  Parameter bias_;
};

/// gamma = 1, beta = 0, eps = 1e-5, running-average momentum 0.99.
class BatchNorm {
 public:
  BatchNorm() = default;
  BatchNorm(const std::string& name, std::size_t width);

  Var forward(Tape& t, Var x, bool training) {
    return batchnorm(t, x, gamma_, beta_, mean_, var_, training);
  }
  void collect(std::vector<Parameter*>& out) { out.insert(out.end(), {&gamma_, &beta_, &mean_, &var_}); }

  Parameter& gamma() { return gamma_; }
  Parameter& beta() { return beta_; }
  Parameter& running_mean() { return mean_; }
  Parameter& running_var() { return var_; }

 private:
  Parameter gamma_;
  Parameter beta_;
  Parameter mean_;
  Parameter var_;
};

/// x + W2 * relu(BN(W1 * x + b1)) + b2. With W2 and b2 zero this is the identity.
class ResidualUnit {
 public:
  ResidualUnit() = default;
  ResidualUnit(const std::string& name, std::size_t width, std::uint64_t seed, bool use_batchnorm);

  Var forward(Tape& t, Var x, bool training);
  void collect(std::vector<Parameter*>& out);

  Dense& inner1() { return inner1_; }
  Dense& inner2() { return inner2_; }

 private:
  Dense inner1_;
  Dense inner2_;
  BatchNorm bn_;
  bool use_bn_ = true;
};

}  // namespace weakmatch::nn
