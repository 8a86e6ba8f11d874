#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace weakmatch::nn {

/// Dense row-major array of doubles. Two-dimensional views treat the first
/// dimension as rows and the product of the rest as columns.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t cols() const { return cols_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  void fill(double v);
  bool all_finite() const;
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  std::string shape_string() const;

  bool operator==(const Tensor& other) const = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
  std::size_t cols_ = 0;
};

/// A named tensor owned by a layer. Trainable parameters carry a gradient
/// buffer of the same shape; non-trainable state (batchnorm running
/// statistics) is persisted but never updated by the optimizer.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Tensor value, bool trainable = true);

  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = true;

  void zero_grad() { grad.fill(0.0); }
};

/// Compressed sparse rows of non-negative counts.
struct SparseRows {
  std::vector<std::size_t> offsets{0};
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  std::size_t rows() const { return offsets.size() - 1; }
  void add_row(std::span<const std::uint32_t> idx, std::span<const double> val);
  void add_empty_row() { offsets.push_back(indices.size()); }
  /// Largest column index + 1 (0 when empty).
  std::size_t min_width() const;
};

/// Word rows of several sequences; sequence s covers rows
/// [starts[s], starts[s + 1]) of `words`.
struct WordBatch {
  SparseRows words;
  std::vector<std::size_t> starts{0};

  std::size_t sequences() const { return starts.size() - 1; }
  void end_sequence() { starts.push_back(words.rows()); }
};

struct Var {
  std::uint32_t id = UINT32_MAX;
  bool valid() const { return id != UINT32_MAX; }
};

/// Reverse-mode autodiff tape. Ops append nodes in execution order;
/// backward() walks them in reverse. Gradients of intermediate nodes are
/// reset on every backward pass, while leaf and parameter gradients
/// accumulate until zeroed by the caller.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, Var self)>;

  Var leaf(Tensor value, bool requires_grad = false);
  /// Appends an op output. Throws RuntimeError when `value` has a non-finite entry.
  Var record(Tensor value, bool requires_grad, BackwardFn backward, const char* op);

  const Tensor& value(Var v) const;
  Tensor& grad(Var v);
  bool requires_grad(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  /// `loss` must be a one-element node recorded on this tape.
  void backward(Var loss);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
    bool requires_grad = false;
    bool is_leaf = false;
  };
  const Node& node(Var v) const;
  std::vector<Node> nodes_;
};

// ---- ops -----------------------------------------------------------------

/// x[B,in] * W[in,out] + b[out]
Var linear(Tape& t, Var x, Parameter& w, Parameter& b);
Var add(Tape& t, Var a, Var b);
Var tanh(Tape& t, Var x);
Var relu(Tape& t, Var x);
Var sigmoid(Tape& t, Var x);
Var affine(Tape& t, Var x, double scale, double shift);
Var concat_cols(Tape& t, std::span<const Var> parts);
/// Sum of all entries, as a one-element tensor.
Var sum(Tape& t, Var x);

/// x[B,V] (sparse) * W[V,E] + b[E]
Var embedding_sum(Tape& t, SparseRows x, Parameter& w, Parameter& b);

/// Convolution over the words of each sequence with a window of
/// `weights.size()` words centred on the current word and zero padding at
/// sequence edges. weights[k] has shape [V,C]; output is [words, C].
Var word_conv(Tape& t, WordBatch x, std::span<Parameter* const> weights, Parameter& bias);

/// Per-sequence, per-channel maximum over rows. Every sequence must be non-empty.
Var segment_max(Tape& t, Var x, std::vector<std::size_t> starts);

/// Each row divided by its L2 norm. An all-zero row becomes the constant
/// unit vector 1/sqrt(cols) and passes no gradient.
Var l2_normalize_rows(Tape& t, Var x);

/// Row-wise dot product of two [B,D] tensors, as [B,1].
Var row_dot(Tape& t, Var a, Var b);

/// Batch normalization over rows. In training mode uses batch statistics and
/// updates the running averages; in eval mode applies the frozen affine map.
Var batchnorm(Tape& t, Var x, Parameter& gamma, Parameter& beta, Parameter& running_mean,
              Parameter& running_var, bool training, double momentum = 0.99, double eps = 1e-5);

// ---- losses (means over rows) ---------------------------------------------

inline constexpr double kProbClamp = 1e-7;

/// (1/B) sum_{b,t} w[b,t] * CE(p[b,t], target[b,t]) with p clamped to
/// [1e-7, 1 - 1e-7]. targets and weights are row-major [B,T].
Var cross_entropy(Tape& t, Var p, std::vector<double> targets, std::vector<double> weights);

/// (1/B) sum_b w[b] * (y[b] - yhat[b])^2 over a [B,1] prediction.
Var weighted_mse(Tape& t, Var yhat, std::vector<double> targets, std::vector<double> weights);

/// Scalar conveniences for tests and reporting.
double cross_entropy_value(double p, double target);
double weighted_mse_value(double yhat, double y, double w);

}  // namespace weakmatch::nn
