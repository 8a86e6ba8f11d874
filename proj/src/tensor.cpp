#include "weakmatch/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "weakmatch/error.hpp"

namespace weakmatch::nn {

namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void require(bool ok, const char* what) {
  if (!ok) throw RuntimeError(what);
}

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw RuntimeError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                       b.shape_string());
  }
}

}  // namespace

namespace {

std::size_t cols_of(const std::vector<std::size_t>& shape, std::size_t size) {
  return shape.empty() || shape[0] == 0 ? 0 : size / shape[0];
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(product(shape_), fill), cols_(cols_of(shape_, data_.size())) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (data_.size() != product(shape_)) {
    throw RuntimeError("Tensor: value count " + std::to_string(data_.size()) +
                       " does not match shape " + shape_string());
  }
  cols_ = cols_of(shape_, data_.size());
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Tensor::shape_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape_.size(); ++i) os << (i ? "," : "") << shape_[i];
  os << ']';
  return os.str();
}

Parameter::Parameter(std::string n, Tensor v, bool train)
    : name(std::move(n)), value(std::move(v)), trainable(train) {
  grad = Tensor(value.shape(), 0.0);
}

void SparseRows::add_row(std::span<const std::uint32_t> idx, std::span<const double> val) {
  require(idx.size() == val.size(), "SparseRows::add_row: index/value length mismatch");
  indices.insert(indices.end(), idx.begin(), idx.end());
  values.insert(values.end(), val.begin(), val.end());
  offsets.push_back(indices.size());
}

std::size_t SparseRows::min_width() const {
  std::size_t w = 0;
  for (auto i : indices) w = std::max<std::size_t>(w, i + 1);
  return w;
}

// ---- tape ----------------------------------------------------------------

Var Tape::leaf(Tensor value, bool requires_grad) {
  require(value.all_finite(), "leaf: non-finite input");
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.is_leaf = true;
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::record(Tensor value, bool requires_grad, BackwardFn backward, const char* op) {
  if (!value.all_finite()) throw RuntimeError(std::string(op) + ": non-finite activation");
  Node n;
  n.value = std::move(value);
  n.backward = std::move(backward);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Tape::Node& Tape::node(Var v) const {
  require(v.valid() && v.id < nodes_.size(), "tape: variable not recorded on this tape");
  return nodes_[v.id];
}

const Tensor& Tape::value(Var v) const { return node(v).value; }

Tensor& Tape::grad(Var v) {
  node(v);
  Node& n = nodes_[v.id];
  if (!n.grad.same_shape(n.value)) n.grad = Tensor(n.value.shape(), 0.0);
  return n.grad;
}

bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }

void Tape::backward(Var loss) {
  require(!nodes_.empty(), "backward called before forward");
  require(loss.valid() && loss.id < nodes_.size(), "backward: loss not recorded on this tape");
  require(nodes_[loss.id].value.size() == 1, "backward: loss must be a single value");
  for (std::size_t i = 0; i <= loss.id; ++i) {
    Node& n = nodes_[i];
    if (!n.is_leaf || !n.grad.same_shape(n.value)) n.grad = Tensor(n.value.shape(), 0.0);
  }
  nodes_[loss.id].grad[0] = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.backward && n.requires_grad) n.backward(*this, Var{static_cast<std::uint32_t>(i)});
  }
}

// ---- ops -------------------------------------------------------------------

Var linear(Tape& t, Var xv, Parameter& w, Parameter& b) {
  const Tensor& x = t.value(xv);
  const std::size_t rows = x.rows(), in = x.cols();
  if (w.value.shape().size() != 2 || w.value.shape()[0] != in) {
    throw RuntimeError("linear: input " + x.shape_string() + " incompatible with weight " +
                       w.value.shape_string());
  }
  const std::size_t out = w.value.shape()[1];
  require(b.value.size() == out, "linear: bias size mismatch");
  Tensor y({rows, out});
  const double* W = w.value.data();
  for (std::size_t r = 0; r < rows; ++r) {
    double* yr = y.data() + r * out;
    std::copy(b.value.data(), b.value.data() + out, yr);
    const double* xr = x.data() + r * in;
    for (std::size_t i = 0; i < in; ++i) {
      const double xi = xr[i];
      if (xi == 0.0) continue;
      const double* wi = W + i * out;
      for (std::size_t o = 0; o < out; ++o) yr[o] += xi * wi[o];
    }
  }
  return t.record(std::move(y), true,
                  [xv, &w, &b, rows, in, out](Tape& tape, Var self) {
                    const Tensor& dy = tape.grad(self);
                    const Tensor& x = tape.value(xv);
                    for (std::size_t r = 0; r < rows; ++r) {
                      const double* dyr = dy.data() + r * out;
                      const double* xr = x.data() + r * in;
                      for (std::size_t o = 0; o < out; ++o) b.grad[o] += dyr[o];
                      for (std::size_t i = 0; i < in; ++i) {
                        const double xi = xr[i];
                        if (xi == 0.0) continue;
                        double* gw = w.grad.data() + i * out;
                        for (std::size_t o = 0; o < out; ++o) gw[o] += xi * dyr[o];
                      }
                    }
                    if (!tape.requires_grad(xv)) return;
                    Tensor& dx = tape.grad(xv);
                    const double* W = w.value.data();
                    for (std::size_t r = 0; r < rows; ++r) {
                      const double* dyr = dy.data() + r * out;
                      double* dxr = dx.data() + r * in;
                      for (std::size_t i = 0; i < in; ++i) {
                        const double* wi = W + i * out;
                        double acc = 0.0;
                        for (std::size_t o = 0; o < out; ++o) acc += wi[o] * dyr[o];
                        dxr[i] += acc;
                      }
                    }
                  },
                  "linear");
}

Var add(Tape& t, Var av, Var bv) {
  const Tensor& a = t.value(av);
  const Tensor& b = t.value(bv);
  require_same(a, b, "add");
  Tensor y = a;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += b[i];
  const bool rg = t.requires_grad(av) || t.requires_grad(bv);
  return t.record(std::move(y), rg,
                  [av, bv](Tape& tape, Var self) {
                    const Tensor& dy = tape.grad(self);
                    for (Var v : {av, bv}) {
                      if (!tape.requires_grad(v)) continue;
                      Tensor& dx = tape.grad(v);
                      for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i];
                    }
                  },
                  "add");
}

namespace {

// Elementwise op whose derivative is expressed through input x and output y.
template <typename F, typename D>
Var elementwise(Tape& t, Var xv, F f, D dfdx, const char* name) {
  const Tensor& x = t.value(xv);
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  return t.record(std::move(y), t.requires_grad(xv),
                  [xv, dfdx](Tape& tape, Var self) {
                    const Tensor& dy = tape.grad(self);
                    const Tensor& x = tape.value(xv);
                    const Tensor& y = tape.value(self);
                    Tensor& dx = tape.grad(xv);
                    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] * dfdx(x[i], y[i]);
                  },
                  name);
}

}  // namespace

Var tanh(Tape& t, Var x) {
  return elementwise(
      t, x, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; }, "tanh");
}

Var relu(Tape& t, Var x) {
  return elementwise(
      t, x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; }, "relu");
}

Var sigmoid(Tape& t, Var x) {
  return elementwise(
      t, x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); }, "sigmoid");
}

Var affine(Tape& t, Var x, double scale, double shift) {
  return elementwise(
      t, x, [scale, shift](double v) { return v * scale + shift; },
      [scale](double, double) { return scale; }, "affine");
}

Var concat_cols(Tape& t, std::span<const Var> parts) {
  require(!parts.empty(), "concat_cols: no inputs");
  const std::size_t rows = t.value(parts[0]).rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  bool rg = false;
  for (Var p : parts) {
    require(t.value(p).rows() == rows, "concat_cols: row count mismatch");
    widths.push_back(t.value(p).cols());
    total += widths.back();
    rg = rg || t.requires_grad(p);
  }
  Tensor y({rows, total});
  std::size_t off = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& x = t.value(parts[k]);
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy(x.data() + r * widths[k], x.data() + (r + 1) * widths[k],
                y.data() + r * total + off);
    }
    off += widths[k];
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return t.record(std::move(y), rg,
                  [inputs, widths, rows, total](Tape& tape, Var self) {
                    const Tensor& dy = tape.grad(self);
                    std::size_t off = 0;
                    for (std::size_t k = 0; k < inputs.size(); ++k) {
                      if (tape.requires_grad(inputs[k])) {
                        Tensor& dx = tape.grad(inputs[k]);
                        for (std::size_t r = 0; r < rows; ++r) {
                          for (std::size_t c = 0; c < widths[k]; ++c) {
                            dx[r * widths[k] + c] += dy[r * total + off + c];
                          }
                        }
                      }
                      off += widths[k];
                    }
                  },
                  "concat_cols");
}

Var sum(Tape& t, Var xv) {
  const Tensor& x = t.value(xv);
  double s = 0.0;
  for (double v : x.values()) s += v;
  return t.record(Tensor::scalar(s), t.requires_grad(xv),
                  [xv](Tape& tape, Var self) {
                    const double g = tape.grad(self)[0];
                    Tensor& dx = tape.grad(xv);
                    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g;
                  },
                  "sum");
}

Var embedding_sum(Tape& t, SparseRows xin, Parameter& w, Parameter& b) {
  auto x = std::make_shared<const SparseRows>(std::move(xin));
  require(w.value.shape().size() == 2, "embedding_sum: weight must be 2-D");
  const std::size_t vocab = w.value.shape()[0], out = w.value.shape()[1];
  require(x->min_width() <= vocab, "embedding_sum: input index beyond vocabulary");
  require(b.value.size() == out, "embedding_sum: bias size mismatch");
  const std::size_t rows = x->rows();
  Tensor y({rows, out});
  for (std::size_t r = 0; r < rows; ++r) {
    double* yr = y.data() + r * out;
    std::copy(b.value.data(), b.value.data() + out, yr);
    for (std::size_t k = x->offsets[r]; k < x->offsets[r + 1]; ++k) {
      const double v = x->values[k];
      const double* wi = w.value.data() + x->indices[k] * out;
      for (std::size_t o = 0; o < out; ++o) yr[o] += v * wi[o];
    }
  }
  return t.record(std::move(y), true,
                  [x, &w, &b, out](Tape& tape, Var self) {
                    const Tensor& dy = tape.grad(self);
                    for (std::size_t r = 0; r < x->rows(); ++r) {
                      const double* dyr = dy.data() + r * out;
                      for (std::size_t o = 0; o < out; ++o) b.grad[o] += dyr[o];
                      for (std::size_t k = x->offsets[r]; k < x->offsets[r + 1]; ++k) {
                        const double v = x->values[k];
                        double* gw = w.grad.data() + x->indices[k] * out;
                        for (std::size_t o = 0; o < out; ++o) gw[o] += v * dyr[o];
                      }
                    }
                  },
                  "embedding_sum");
}

Var word_conv(Tape& t, WordBatch xin, std::span<Parameter* const> weights, Parameter& bias) {
  auto x = std::make_shared<const WordBatch>(std::move(xin));
  require(!weights.empty(), "word_conv: empty window");
  const std::size_t window = weights.size();
  const std::size_t vocab = weights[0]->value.shape()[0];
  const std::size_t out = weights[0]->value.shape()[1];
  for (auto* w : weights) {
    require(w->value.shape() == weights[0]->value.shape(), "word_conv: window weight mismatch");
  }
  require(bias.value.size() == out, "word_conv: bias size mismatch");
  require(x->words.min_width() <= vocab, "word_conv: input index beyond vocabulary");
  require(x->starts.back() == x->words.rows(), "word_conv: sequences do not cover all words");
  const auto half = static_cast<std::ptrdiff_t>(window / 2);
  const SparseRows& words = x->words;
  Tensor y({words.rows(), out});
  for (std::size_t s = 0; s < x->sequences(); ++s) {
    const auto lo = static_cast<std::ptrdiff_t>(x->starts[s]);
    const auto hi = static_cast<std::ptrdiff_t>(x->starts[s + 1]);
    for (std::ptrdiff_t i = lo; i < hi; ++i) {
      double* yr = y.data() + i * out;
      std::copy(bias.value.data(), bias.value.data() + out, yr);
      for (std::size_t k = 0; k < window; ++k) {
        const std::ptrdiff_t j = i + static_cast<std::ptrdiff_t>(k) - half;
        if (j < lo || j >= hi) continue;
        const double* W = weights[k]->value.data();
        for (std::size_t n = words.offsets[j]; n < words.offsets[j + 1]; ++n) {
          const double v = words.values[n];
          const double* wi = W + words.indices[n] * out;
          for (std::size_t o = 0; o < out; ++o) yr[o] += v * wi[o];
        }
      }
    }
  }
  std::vector<Parameter*> ws(weights.begin(), weights.end());
  return t.record(std::move(y), true,
                  [x, ws, &bias, out, half](Tape& tape, Var self) {
                    const Tensor& dy = tape.grad(self);
                    const SparseRows& words = x->words;
                    for (std::size_t s = 0; s < x->sequences(); ++s) {
                      const auto lo = static_cast<std::ptrdiff_t>(x->starts[s]);
                      const auto hi = static_cast<std::ptrdiff_t>(x->starts[s + 1]);
                      for (std::ptrdiff_t i = lo; i < hi; ++i) {
                        const double* dyr = dy.data() + i * out;
                        for (std::size_t o = 0; o < out; ++o) bias.grad[o] += dyr[o];
                        for (std::size_t k = 0; k < ws.size(); ++k) {
                          const std::ptrdiff_t j = i + static_cast<std::ptrdiff_t>(k) - half;
                          if (j < lo || j >= hi) continue;
                          double* G = ws[k]->grad.data();
                          for (std::size_t n = words.offsets[j]; n < words.offsets[j + 1]; ++n) {
                            const double v = words.values[n];
                            double* gi = G + words.indices[n] * out;
                            for (std::size_t o = 0; o < out; ++o) gi[o] += v * dyr[o];
                          }
                        }
                      }
                    }
                  },
                  "word_conv");
}

Var segment_max(Tape& t, Var xv, std::vector<std::size_t> starts) {
  const Tensor& x = t.value(xv);
  require(!starts.empty() && starts.back() == x.rows(), "segment_max: segments do not cover input");
  const std::size_t segs = starts.size() - 1, cols = x.cols();
  Tensor y({segs, cols});
  std::vector<std::size_t> arg(segs * cols);
  for (std::size_t s = 0; s < segs; ++s) {
    require(starts[s + 1] > starts[s], "segment_max: empty sequence");
    double* ys = y.data() + s * cols;
    std::size_t* as = arg.data() + s * cols;
    const double* first = x.data() + starts[s] * cols;
    std::copy(first, first + cols, ys);
    std::fill(as, as + cols, starts[s]);
    // Strict comparison keeps the first maximal row.
    for (std::size_t r = starts[s] + 1; r < starts[s + 1]; ++r) {
      const double* xr = x.data() + r * cols;
      for (std::size_t c = 0; c < cols; ++c) {
        if (xr[c] > ys[c]) {
          ys[c] = xr[c];
          as[c] = r;
        }
      }
    }
  }
  return t.record(std::move(y), t.requires_grad(xv),
                  [xv, arg = std::move(arg), cols](Tape& tape, Var self) {
                    const Tensor& dy = tape.grad(self);
                    Tensor& dx = tape.grad(xv);
                    for (std::size_t k = 0; k < arg.size(); ++k) {
                      dx[arg[k] * cols + k % cols] += dy[k];
                    }
                  },
                  "segment_max");
}

Var l2_normalize_rows(Tape& t, Var xv) {
  const Tensor& x = t.value(xv);
  const std::size_t rows = x.rows(), cols = x.cols();
  Tensor y(x.shape());
  std::vector<double> norms(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double ss = 0.0;
    for (std::size_t c = 0; c < cols; ++c) ss += x.at(r, c) * x.at(r, c);
    const double n = std::sqrt(ss);
    norms[r] = n;
    if (n == 0.0) {
      // Zero rows (e.g. a query with no known trigram) map to a fixed unit vector.
      for (std::size_t c = 0; c < cols; ++c) y.at(r, c) = 1.0 / std::sqrt(static_cast<double>(cols));
      continue;
    }
    for (std::size_t c = 0; c < cols; ++c) y.at(r, c) = x.at(r, c) / n;
  }
  return t.record(std::move(y), t.requires_grad(xv),
                  [xv, norms = std::move(norms), rows, cols](Tape& tape, Var self) {
                    const Tensor& dy = tape.grad(self);
                    const Tensor& y = tape.value(self);
                    Tensor& dx = tape.grad(xv);
                    for (std::size_t r = 0; r < rows; ++r) {
                      if (norms[r] == 0.0) continue;
                      double dot = 0.0;
                      for (std::size_t c = 0; c < cols; ++c) dot += y.at(r, c) * dy.at(r, c);
                      for (std::size_t c = 0; c < cols; ++c) {
                        dx.at(r, c) += (dy.at(r, c) - y.at(r, c) * dot) / norms[r];
                      }
                    }
                  },
                  "l2_normalize_rows");
}

Var row_dot(Tape& t, Var av, Var bv) {
  const Tensor& a = t.value(av);
  const Tensor& b = t.value(bv);
  require_same(a, b, "row_dot");
  const std::size_t rows = a.rows(), cols = a.cols();
  Tensor y({rows, 1});
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += a.at(r, c) * b.at(r, c);
    y[r] = s;
  }
  const bool rg = t.requires_grad(av) || t.requires_grad(bv);
  return t.record(std::move(y), rg,
                  [av, bv, rows, cols](Tape& tape, Var self) {
                    const Tensor& dy = tape.grad(self);
                    const Tensor& a = tape.value(av);
                    const Tensor& b = tape.value(bv);
                    if (tape.requires_grad(av)) {
                      Tensor& da = tape.grad(av);
                      for (std::size_t r = 0; r < rows; ++r)
                        for (std::size_t c = 0; c < cols; ++c) da.at(r, c) += dy[r] * b.at(r, c);
                    }
                    if (tape.requires_grad(bv)) {
                      Tensor& db = tape.grad(bv);
                      for (std::size_t r = 0; r < rows; ++r)
                        for (std::size_t c = 0; c < cols; ++c) db.at(r, c) += dy[r] * a.at(r, c);
                    }
                  },
                  "row_dot");
}

Var batchnorm(Tape& t, Var xv, Parameter& gamma, Parameter& beta, Parameter& running_mean,
              Parameter& running_var, bool training, double momentum, double eps) {
  const Tensor& x = t.value(xv);
  const std::size_t rows = x.rows(), cols = x.cols();
  require(gamma.value.size() == cols && beta.value.size() == cols &&
              running_mean.value.size() == cols && running_var.value.size() == cols,
          "batchnorm: feature width mismatch");
  require(rows > 0, "batchnorm: empty batch");
  Tensor y(x.shape());
  if (!training) {
    std::vector<double> scale(cols);
    for (std::size_t c = 0; c < cols; ++c) {
      scale[c] = gamma.value[c] / std::sqrt(running_var.value[c] + eps);
      for (std::size_t r = 0; r < rows; ++r) {
        y.at(r, c) = (x.at(r, c) - running_mean.value[c]) * scale[c] + beta.value[c];
      }
    }
    return t.record(std::move(y), true,
                    [xv, &gamma, &beta, &running_mean, scale = std::move(scale), rows,
                     cols](Tape& tape, Var self) {
                      const Tensor& dy = tape.grad(self);
                      const Tensor& x = tape.value(xv);
                      for (std::size_t c = 0; c < cols; ++c) {
                        const double inv = scale[c] / gamma.value[c];
                        for (std::size_t r = 0; r < rows; ++r) {
                          beta.grad[c] += dy.at(r, c);
                          gamma.grad[c] += dy.at(r, c) * (x.at(r, c) - running_mean.value[c]) * inv;
                        }
                      }
                      if (!tape.requires_grad(xv)) return;
                      Tensor& dx = tape.grad(xv);
                      for (std::size_t r = 0; r < rows; ++r)
                        for (std::size_t c = 0; c < cols; ++c) dx.at(r, c) += dy.at(r, c) * scale[c];
                    },
                    "batchnorm");
  }
  std::vector<double> inv_std(cols);
  Tensor xhat(x.shape());
  const auto n = static_cast<double>(rows);
  for (std::size_t c = 0; c < cols; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < rows; ++r) mean += x.at(r, c);
    mean /= n;
    double var = 0.0;
    for (std::size_t r = 0; r < rows; ++r) var += (x.at(r, c) - mean) * (x.at(r, c) - mean);
    var /= n;
    inv_std[c] = 1.0 / std::sqrt(var + eps);
    for (std::size_t r = 0; r < rows; ++r) {
      xhat.at(r, c) = (x.at(r, c) - mean) * inv_std[c];
      y.at(r, c) = gamma.value[c] * xhat.at(r, c) + beta.value[c];
    }
    running_mean.value[c] = momentum * running_mean.value[c] + (1.0 - momentum) * mean;
    running_var.value[c] = momentum * running_var.value[c] + (1.0 - momentum) * var;
  }
  return t.record(std::move(y), true,
                  [xv, &gamma, &beta, xhat = std::move(xhat), inv_std = std::move(inv_std), rows,
                   cols](Tape& tape, Var self) {
                    const Tensor& dy = tape.grad(self);
                    const auto n = static_cast<double>(rows);
                    const bool rg = tape.requires_grad(xv);
                    for (std::size_t c = 0; c < cols; ++c) {
                      double sum_dy = 0.0, sum_dy_xhat = 0.0;
                      for (std::size_t r = 0; r < rows; ++r) {
                        sum_dy += dy.at(r, c);
                        sum_dy_xhat += dy.at(r, c) * xhat.at(r, c);
                      }
                      beta.grad[c] += sum_dy;
                      gamma.grad[c] += sum_dy_xhat;
                      if (!rg) continue;
                      Tensor& dx = tape.grad(xv);
                      const double g = gamma.value[c] * inv_std[c] / n;
                      for (std::size_t r = 0; r < rows; ++r) {
                        dx.at(r, c) += g * (n * dy.at(r, c) - sum_dy - xhat.at(r, c) * sum_dy_xhat);
                      }
                    }
                  },
                  "batchnorm");
}

// ---- losses ------------------------------------------------------------------

double cross_entropy_value(double p, double target) {
  const double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  return -(target * std::log(pc) + (1.0 - target) * std::log(1.0 - pc));
}

double weighted_mse_value(double yhat, double y, double w) { return w * (y - yhat) * (y - yhat); }

Var cross_entropy(Tape& t, Var pv, std::vector<double> targets, std::vector<double> weights) {
  const Tensor& p = t.value(pv);
  if (targets.size() != p.size() || weights.size() != p.size()) {
    throw RuntimeError("cross_entropy: targets/weights must match prediction size " +
                       p.shape_string());
  }
  const auto n = static_cast<double>(p.rows());
  double loss = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (weights[i] != 0.0) loss += weights[i] * cross_entropy_value(p[i], targets[i]);
  }
  return t.record(Tensor::scalar(loss / n), t.requires_grad(pv),
                  [pv, targets = std::move(targets), weights = std::move(weights), n](Tape& tape,
                                                                                     Var self) {
                    const double g = tape.grad(self)[0] / n;
                    const Tensor& p = tape.value(pv);
                    Tensor& dp = tape.grad(pv);
                    for (std::size_t i = 0; i < p.size(); ++i) {
                      if (weights[i] == 0.0) continue;
                      if (p[i] < kProbClamp || p[i] > 1.0 - kProbClamp) continue;
                      dp[i] += g * weights[i] *
                               (-targets[i] / p[i] + (1.0 - targets[i]) / (1.0 - p[i]));
                    }
                  },
                  "cross_entropy");
}

Var weighted_mse(Tape& t, Var yv, std::vector<double> targets, std::vector<double> weights) {
  const Tensor& yhat = t.value(yv);
  require(yhat.cols() == 1 || yhat.rows() == yhat.size(), "weighted_mse: prediction must be [B,1]");
  require(targets.size() == yhat.size() && weights.size() == yhat.size(),
          "weighted_mse: targets/weights must match prediction size");
  const auto n = static_cast<double>(yhat.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < yhat.size(); ++i) {
    loss += weighted_mse_value(yhat[i], targets[i], weights[i]);
  }
  return t.record(Tensor::scalar(loss / n), t.requires_grad(yv),
                  [yv, targets = std::move(targets), weights = std::move(weights), n](Tape& tape,
                                                                                     Var self) {
                    const double g = tape.grad(self)[0] / n;
                    const Tensor& yhat = tape.value(yv);
                    Tensor& dy = tape.grad(yv);
                    for (std::size_t i = 0; i < yhat.size(); ++i) {
                      dy[i] += g * weights[i] * 2.0 * (yhat[i] - targets[i]);
                    }
                  },
                  "weighted_mse");
}

}  // namespace weakmatch::nn
