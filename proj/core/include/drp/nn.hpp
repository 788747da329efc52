#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "drp/param.hpp"
#include "drp/rng.hpp"
#include "drp/tensor.hpp"

namespace drp {

// Numerically stable logistic function; never overflows for finite input.
inline double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Derivative expressed through the forward value s = sigmoid(x).
inline double sigmoid_grad_from_value(double s) { return s * (1.0 - s); }

Tensor sigmoid(const Tensor& x);

// y = W x + b with W [m x n], b [m], x [n].
Tensor affine(const Tensor& W, const Tensor& b, const Tensor& x);

void affine_forward(const Tensor& W, const Tensor& b,
                    std::span<const double> x, std::span<double> y);

// Accumulates dW, db and writes dx for the upstream gradient dy.
void affine_backward(const Tensor& W, std::span<const double> x,
                     std::span<const double> dy, Tensor& dW, Tensor& db,
                     std::span<double> dx);

// Four accumulators break the serial FMA dependency chain; the summation
// order is fixed, so results stay bit-reproducible.
inline double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return ((s0 + s1) + (s2 + s3)) + tail;
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

// Fully connected layer; caches live outside the layer so const forward
// passes can run concurrently on separate workspaces.
class Affine {
 public:
  struct Cache {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> dx;
  };

  Affine() = default;
  Affine(std::string name, std::size_t out, std::size_t in, Rng& rng);

  std::span<const double> forward(std::span<const double> x, Cache& c) const;
  // Returns dx; accumulates into W.grad / b.grad.
  std::span<const double> backward(std::span<const double> dy, Cache& c);

  std::size_t in_dim() const { return W.value.empty() ? 0 : W.value.cols(); }
  std::size_t out_dim() const { return W.value.empty() ? 0 : W.value.rows(); }
  void collect(std::vector<ParamBlock*>& out) {
    out.push_back(&W);
    out.push_back(&b);
  }

  ParamBlock W;
  ParamBlock b;
};

// Stack of affine layers with ReLU between them. The last layer is linear
// unless relu_last is set.
class Mlp {
 public:
  struct Cache {
    std::vector<Affine::Cache> layers;
    std::vector<std::vector<double>> act;  // post-ReLU activations
    std::vector<double> dx;
    std::vector<double> scratch;
  };

  Mlp() = default;
  Mlp(std::string name, std::vector<std::size_t> dims, Rng& rng,
      bool relu_last = false);

  std::span<const double> forward(std::span<const double> x, Cache& c) const;
  std::span<const double> backward(std::span<const double> dy, Cache& c);

  bool empty() const { return layers_.empty(); }
  std::size_t in_dim() const { return layers_.empty() ? 0 : layers_.front().in_dim(); }
  std::size_t out_dim() const { return layers_.empty() ? 0 : layers_.back().out_dim(); }
  void collect(std::vector<ParamBlock*>& out) {
    for (auto& l : layers_) l.collect(out);
  }
  Affine& layer(std::size_t i) { return layers_[i]; }
  std::size_t depth() const { return layers_.size(); }

 private:
  std::vector<Affine> layers_;
  bool relu_last_ = false;
};

// Embedding table; rows are looked up by id and gradients are scattered
// back into the touched rows only.
class Embedding {
 public:
  Embedding() = default;
  Embedding(std::string name, std::size_t vocab, std::size_t dim, Rng& rng);

  std::span<const double> row(std::size_t id) const { return table.value.row(id); }
  void accumulate_grad(std::size_t id, std::span<const double> g, double scale = 1.0);

  std::size_t vocab() const { return table.value.rows(); }
  std::size_t dim() const { return table.value.cols(); }
  void collect(std::vector<ParamBlock*>& out) { out.push_back(&table); }

  ParamBlock table;
};

// One cross layer: y = x0 * (w . x) + b + x, all vectors of equal length.
class CrossLayer {
 public:
  struct Cache {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> dx;
    std::vector<double> dx0;
    double s = 0.0;
  };

  CrossLayer() = default;
  CrossLayer(std::string name, std::size_t dim, Rng& rng);

  std::span<const double> forward(std::span<const double> x0,
                                  std::span<const double> x, Cache& c) const;
  // Writes the gradient w.r.t. x into c.dx and w.r.t. x0 into c.dx0.
  void backward(std::span<const double> x0, std::span<const double> dy,
                Cache& c);

  void collect(std::vector<ParamBlock*>& out) {
    out.push_back(&w);
    out.push_back(&b);
  }

  ParamBlock w;
  ParamBlock b;
};

// Uniform(-limit, limit) with the Glorot limit sqrt(6 / (in + out)).
void glorot_init(Tensor& t, std::size_t in, std::size_t out, Rng& rng);

}  // namespace drp
