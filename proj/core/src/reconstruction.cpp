#include "drp/reconstruction.hpp"

#include <cmath>

#include "drp/error.hpp"

namespace drp {

double fixed_fusion(double p, double r, double delta) {
  if (r == 0.0 && delta < 0.0) {
    throw DomainError("fixed fusion: r = 0 with negative delta");
  }
  return std::pow(r, delta) * p;
}

AreaProbabilities area_probabilities(double p_c, double r) {
  AreaProbabilities ap;
  ap.p11 = p_c * r;
  ap.p10 = p_c * (1.0 - r);
  ap.p01 = (1.0 - p_c) * r;
  ap.p00 = (1.0 - p_c) * (1.0 - r);
  return ap;
}

double global_fusion(const AreaProbabilities& ap, double r, double delta,
                     double a1, double a0, double b1, double b0) {
  if (r == 0.0 && delta < 1.0) {
    throw DomainError("global fusion: r = 0 with delta < 1");
  }
  const double bilinear =
      ap.p11 * a1 * b1 + ap.p10 * a1 * b0 + ap.p01 * a0 * b1 + ap.p00 * a0 * b0;
  return std::pow(r, delta - 1.0) * bilinear;
}

double row_orthonormality_error(const Tensor& O) {
  const std::size_t d = O.rows();
  double sq = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double g = dot(O.row(i), O.row(j)) - (i == j ? 1.0 : 0.0);
      sq += g * g;
    }
  }
  return std::sqrt(sq);
}

void retract_rows(Tensor& O) {
  const std::size_t d = O.rows();
  const std::size_t h = O.cols();
  if (d > h) {
    throw DimensionError("retract: rank " + std::to_string(d) +
                         " exceeds hidden width " + std::to_string(h));
  }
  // Modified Gram-Schmidt, two passes per row for a defect near machine
  // precision. The Gram-Schmidt R has positive diagonal by construction.
  for (std::size_t i = 0; i < d; ++i) {
    auto ri = O.row(i);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < i; ++j) {
        const double proj = dot(O.row(j), ri);
        axpy(-proj, O.row(j), ri);
      }
    }
    const double norm = std::sqrt(dot(ri, ri));
    if (norm < 1e-12) {
      throw DegeneracyError("retract: row " + std::to_string(i) +
                            " numerically rank deficient");
    }
    const double inv = 1.0 / norm;
    for (auto& x : ri) x *= inv;
  }
}

PreferenceEditor::PreferenceEditor(std::size_t rank, std::size_t hidden,
                                   Rng& rng) {
  if (rank > hidden) {
    throw ConfigError("editor rank D " + std::to_string(rank) +
                      " must not exceed hidden width H " +
                      std::to_string(hidden));
  }
  Tensor init({rank, hidden});
  for (std::size_t i = 0; i < init.size(); ++i) init[i] = rng.normal();
  retract_rows(init);
  O = ParamBlock("edit.O", init);
  W1 = ParamBlock("edit.W1", init);
  W2 = ParamBlock("edit.W2", init);
}

std::span<const double> PreferenceEditor::forward(std::span<const double> e_p,
                                                  std::span<const double> e_r,
                                                  bool orthogonal,
                                                  Cache& c) const {
  const std::size_t d = rank(), h = hidden();
  if (e_p.size() != h || e_r.size() != h) {
    throw DimensionError("edit: representation size " +
                         std::to_string(e_p.size()) + " != H " +
                         std::to_string(h));
  }
  const Tensor& M1 = orthogonal ? O.value : W1.value;
  const Tensor& M2 = orthogonal ? O.value : W2.value;

  c.diff.resize(h);
  for (std::size_t i = 0; i < h; ++i) c.diff[i] = e_p[i] - e_r[i];

  c.z.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    // M1 e_p - M1 e_r, written as M1 (e_p - e_r)
    c.z[k] = dot(M1.row(k), c.diff);
  }

  c.epc.assign(h, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    axpy(c.z[k], M2.row(k), c.epc);
  }
  return c.epc;
}

void PreferenceEditor::backward(std::span<const double> d_epc, bool orthogonal,
                                Cache& c) {
  const std::size_t d = rank(), h = hidden();
  ParamBlock& M1 = orthogonal ? O : W1;
  ParamBlock& M2 = orthogonal ? O : W2;

  // t = M2 d_epc (gradient reaching z), then d_ep = M1^T t, d_er = -d_ep.
  std::vector<double> t(d);
  for (std::size_t k = 0; k < d; ++k) t[k] = dot(M2.value.row(k), d_epc);

  c.d_ep.assign(h, 0.0);
  for (std::size_t k = 0; k < d; ++k) axpy(t[k], M1.value.row(k), c.d_ep);
  c.d_er.resize(h);
  for (std::size_t i = 0; i < h; ++i) c.d_er[i] = -c.d_ep[i];

  // dM2 += z d_epc^T ; dM1 += t diff^T (same block when orthogonal).
  for (std::size_t k = 0; k < d; ++k) {
    auto g2 = M2.grad.row(k);
    auto g1 = M1.grad.row(k);
    for (std::size_t i = 0; i < h; ++i) {
      g2[i] += c.z[k] * d_epc[i];
      g1[i] += t[k] * c.diff[i];
    }
  }
}

FusionHead::FusionHead(std::size_t embed, double delta,
                       std::array<double, 2> alpha_init,
                       std::array<double, 2> beta_init, Rng& rng)
    : alpha("fuse.alpha", Tensor({2}, {alpha_init[0], alpha_init[1]})),
      beta("fuse.beta", Tensor({2}, {beta_init[0], beta_init[1]})),
      delta_(delta),
      corrector_("fuse.corrector", {3 * embed, 32, 1}, rng) {
  // Zero final layer so the corrector starts exactly neutral (F = 1).
  auto& last = corrector_.layer(corrector_.depth() - 1);
  last.W.value.fill(0.0);
  last.b.value.fill(0.0);
}

double FusionHead::global(double p_c, double r, Cache& c) const {
  c.p_c = p_c;
  c.r = r;
  c.ap = area_probabilities(p_c, r);
  c.y_global = global_fusion(c.ap, r, delta_, alpha.value[0], alpha.value[1],
                             beta.value[0], beta.value[1]);
  return c.y_global;
}

void FusionHead::global_backward(double d_yg, Cache& c) {
  const double a1 = alpha.value[0], a0 = alpha.value[1];
  const double b1 = beta.value[0], b0 = beta.value[1];
  const double rpow = std::pow(c.r, delta_ - 1.0);
  const double bilinear =
      c.ap.p11 * a1 * b1 + c.ap.p10 * a1 * b0 + c.ap.p01 * a0 * b1 +
      c.ap.p00 * a0 * b0;

  alpha.grad[0] += d_yg * rpow * (c.ap.p11 * b1 + c.ap.p10 * b0);
  alpha.grad[1] += d_yg * rpow * (c.ap.p01 * b1 + c.ap.p00 * b0);
  beta.grad[0] += d_yg * rpow * (c.ap.p11 * a1 + c.ap.p01 * a0);
  beta.grad[1] += d_yg * rpow * (c.ap.p10 * a1 + c.ap.p00 * a0);

  const double d_p11 = d_yg * rpow * a1 * b1;
  const double d_p10 = d_yg * rpow * a1 * b0;
  const double d_p01 = d_yg * rpow * a0 * b1;
  const double d_p00 = d_yg * rpow * a0 * b0;

  c.d_pc += d_p11 * c.r + d_p10 * (1.0 - c.r) - d_p01 * c.r -
            d_p00 * (1.0 - c.r);
  c.d_r += d_p11 * c.p_c - d_p10 * c.p_c + d_p01 * (1.0 - c.p_c) -
           d_p00 * (1.0 - c.p_c);
  if (delta_ != 1.0 && c.r > 0.0) {
    const double t = d_yg * (delta_ - 1.0) * std::pow(c.r, delta_ - 2.0) * bilinear;
    if (std::isfinite(t)) c.d_r += t;
  }
}

double FusionHead::local_factor(const EncodedTriple& x, Cache& c) const {
  const std::size_t d = x.u.size();
  c.joined.resize(3 * d);
  for (std::size_t i = 0; i < d; ++i) c.joined[i] = x.u[i];
  for (std::size_t i = 0; i < d; ++i) c.joined[d + i] = x.v[i];
  for (std::size_t i = 0; i < d; ++i) c.joined[2 * d + i] = x.q[i];
  auto out = corrector_.forward(c.joined, c.corrector);
  c.corr_logit = out[0];
  c.factor = 2.0 * sigmoid(c.corr_logit);
  return c.factor;
}

void FusionHead::local_backward(double d_factor, Cache& c) {
  const double s = 0.5 * c.factor;  // sigmoid(corr_logit)
  const double dl[1] = {d_factor * 2.0 * s * (1.0 - s)};
  auto dj = corrector_.backward(std::span<const double>(dl, 1), c.corrector);
  const std::size_t d = dj.size() / 3;
  c.du.assign(dj.begin(), dj.begin() + d);
  c.dv.assign(dj.begin() + d, dj.begin() + 2 * d);
  c.dq.assign(dj.begin() + 2 * d, dj.end());
}

}  // namespace drp
