#include "drp/nn.hpp"

#include <cassert>

#include "drp/error.hpp"

namespace drp {

Tensor sigmoid(const Tensor& x) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = sigmoid(x[i]);
  return y;
}

Tensor affine(const Tensor& W, const Tensor& b, const Tensor& x) {
  if (W.shape().size() != 2 || W.cols() != x.size() || W.rows() != b.size()) {
    throw DimensionError("affine: W " + W.shape_str() + " incompatible with b " +
                         b.shape_str() + ", x " + x.shape_str());
  }
  Tensor y({W.rows()});
  affine_forward(W, b, x.view(), y.view());
  return y;
}

void affine_forward(const Tensor& W, const Tensor& b,
                    std::span<const double> x, std::span<double> y) {
  const std::size_t m = W.rows(), n = W.cols();
  const double* w = W.data();
  for (std::size_t i = 0; i < m; ++i) {
    y[i] = b[i] + dot({w + i * n, n}, x);
  }
}

void affine_backward(const Tensor& W, std::span<const double> x,
                     std::span<const double> dy, Tensor& dW, Tensor& db,
                     std::span<double> dx) {
  const std::size_t m = W.rows(), n = W.cols();
  const double* __restrict w = W.data();
  const double* __restrict xp = x.data();
  double* __restrict dwp = dW.data();
  double* __restrict dxp = dx.data();
  for (std::size_t j = 0; j < n; ++j) dxp[j] = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double g = dy[i];
    db[i] += g;
    const double* __restrict wr = w + i * n;
    double* __restrict dwr = dwp + i * n;
    for (std::size_t j = 0; j < n; ++j) dwr[j] += g * xp[j];
    for (std::size_t j = 0; j < n; ++j) dxp[j] += g * wr[j];
  }
}

void glorot_init(Tensor& t, std::size_t in, std::size_t out, Rng& rng) {
  const double limit = std::sqrt(6.0 / double(in + out));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-limit, limit);
}

Affine::Affine(std::string name, std::size_t out, std::size_t in, Rng& rng)
    : W(name + ".W", Tensor({out, in})), b(name + ".b", Tensor({out})) {
  glorot_init(W.value, in, out, rng);
}

std::span<const double> Affine::forward(std::span<const double> x,
                                        Cache& c) const {
  if (x.size() != in_dim()) {
    throw DimensionError("affine " + W.name + ": input size " +
                         std::to_string(x.size()) + " != " + W.value.shape_str());
  }
  c.x.assign(x.begin(), x.end());
  c.y.resize(out_dim());
  affine_forward(W.value, b.value, x, c.y);
  return c.y;
}

std::span<const double> Affine::backward(std::span<const double> dy, Cache& c) {
  c.dx.resize(in_dim());
  affine_backward(W.value, c.x, dy, W.grad, b.grad, c.dx);
  return c.dx;
}

Mlp::Mlp(std::string name, std::vector<std::size_t> dims, Rng& rng,
         bool relu_last)
    : relu_last_(relu_last) {
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    layers_.emplace_back(name + ".l" + std::to_string(i), dims[i + 1], dims[i],
                         rng);
    // Small positive bias on ReLU-fed units keeps pre-activations off the
    // exact kink (subgradient and finite differences disagree there).
    if (relu_last_ || i + 2 < dims.size()) {
      layers_.back().b.value.fill(0.01);
    }
  }
}

std::span<const double> Mlp::forward(std::span<const double> x,
                                     Cache& c) const {
  c.layers.resize(layers_.size());
  c.act.resize(layers_.size());
  std::span<const double> cur = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    cur = layers_[i].forward(cur, c.layers[i]);
    const bool relu = relu_last_ || i + 1 < layers_.size();
    auto& act = c.act[i];
    act.assign(cur.begin(), cur.end());
    if (relu) {
      for (auto& v : act) v = v > 0.0 ? v : 0.0;
    }
    cur = act;
  }
  return cur;
}

std::span<const double> Mlp::backward(std::span<const double> dy, Cache& c) {
  c.scratch.assign(dy.begin(), dy.end());
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const bool relu = relu_last_ || k + 1 < layers_.size();
    if (relu) {
      const auto& pre = c.layers[k].y;  // pre-activation
      for (std::size_t i = 0; i < c.scratch.size(); ++i) {
        if (pre[i] <= 0.0) c.scratch[i] = 0.0;
      }
    }
    auto dx = layers_[k].backward(c.scratch, c.layers[k]);
    c.scratch.assign(dx.begin(), dx.end());
  }
  c.dx = c.scratch;
  return c.dx;
}

Embedding::Embedding(std::string name, std::size_t vocab, std::size_t dim,
                     Rng& rng)
    : table(std::move(name), Tensor({vocab, dim})) {
  for (std::size_t i = 0; i < table.value.size(); ++i) {
    table.value[i] = rng.uniform(-0.05, 0.05);
  }
}

void Embedding::accumulate_grad(std::size_t id, std::span<const double> g,
                                double scale) {
  auto row = table.grad.row(id);
  for (std::size_t i = 0; i < row.size(); ++i) row[i] += scale * g[i];
}

CrossLayer::CrossLayer(std::string name, std::size_t dim, Rng& rng)
    : w(name + ".w", Tensor({dim})), b(name + ".b", Tensor({dim})) {
  glorot_init(w.value, dim, 1, rng);
}

std::span<const double> CrossLayer::forward(std::span<const double> x0,
                                            std::span<const double> x,
                                            Cache& c) const {
  if (x0.size() != w.value.size() || x.size() != w.value.size()) {
    throw DimensionError("cross layer " + w.name + ": input size mismatch");
  }
  c.x.assign(x.begin(), x.end());
  c.s = dot(w.value.view(), x);
  c.y.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    c.y[i] = x0[i] * c.s + b.value[i] + x[i];
  }
  return c.y;
}

void CrossLayer::backward(std::span<const double> x0,
                          std::span<const double> dy, Cache& c) {
  const double ds = dot(dy, x0);
  c.dx.assign(c.x.size(), 0.0);
  c.dx0.assign(c.x.size(), 0.0);
  for (std::size_t i = 0; i < c.x.size(); ++i) {
    w.grad[i] += ds * c.x[i];
    b.grad[i] += dy[i];
    c.dx[i] = ds * w.value[i] + dy[i];
    c.dx0[i] = c.s * dy[i];
  }
}

}  // namespace drp
