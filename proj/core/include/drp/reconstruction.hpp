#pragma once

#include <array>
#include <vector>

#include "drp/encoding.hpp"
#include "drp/nn.hpp"

namespace drp {

// Joint probabilities over the four (preference, relevance) statuses derived
// from the calibrated preference p_c and relevance r. Always sums to 1.
struct AreaProbabilities {
  double p11 = 0.0;  // P=1, R=1
  double p10 = 0.0;  // P=1, R=0
  double p01 = 0.0;  // P=0, R=1
  double p00 = 0.0;  // P=0, R=0
  double sum() const { return p11 + p10 + p01 + p00; }
};

// y = r^delta * p. Throws DomainError for r == 0 with delta < 0.
double fixed_fusion(double p, double r, double delta);

AreaProbabilities area_probabilities(double p_c, double r);

// y_g = r^(delta-1) * (P11 a1 b1 + P10 a1 b0 + P01 a0 b1 + P00 a0 b0).
// Throws DomainError for r == 0 with delta < 1.
double global_fusion(const AreaProbabilities& ap, double r, double delta,
                     double a1, double a0, double b1, double b0);

// Predictions handed to the BCE loss are clamped to this interior.
inline constexpr double kScoreFloor = 1e-7;
inline constexpr double kScoreCeil = 1.0 - 1e-7;
inline double clamp_score(double y) {
  return y < kScoreFloor ? kScoreFloor : (y > kScoreCeil ? kScoreCeil : y);
}

// Frobenius distance of O O^T from the identity; the orthonormality defect.
double row_orthonormality_error(const Tensor& O);

// Replace O (D x H, D <= H) by the row-orthonormal factor of its
// Gram-Schmidt decomposition, positive-diagonal sign convention. Idempotent;
// throws DegeneracyError when a row degenerates (residual norm < 1e-12).
void retract_rows(Tensor& O);

// Editing of the preference representation inside the low-rank subspace:
// e_pc = M2^T (M1 e_p - M1 e_r). The orthogonal flavor uses M1 = M2 = O kept
// row-orthonormal by retraction; the free flavor uses unconstrained W1, W2.
class PreferenceEditor {
 public:
  struct Cache {
    std::vector<double> z;      // M1 e_p - M1 e_r
    std::vector<double> diff;   // e_p - e_r
    std::vector<double> epc;
    std::vector<double> d_ep, d_er;
  };

  PreferenceEditor() = default;
  PreferenceEditor(std::size_t rank, std::size_t hidden, Rng& rng);

  std::span<const double> forward(std::span<const double> e_p,
                                  std::span<const double> e_r,
                                  bool orthogonal, Cache& c) const;
  // Fills c.d_ep / c.d_er and accumulates into the active matrices' grads.
  void backward(std::span<const double> d_epc, bool orthogonal, Cache& c);

  void retract() { retract_rows(O.value); }
  double orthonormality_error() const { return row_orthonormality_error(O.value); }
  double free_orthonormality_error() const {
    return row_orthonormality_error(W1.value);
  }

  std::size_t rank() const { return O.value.rows(); }
  std::size_t hidden() const { return O.value.cols(); }

  ParamBlock O;   // orthogonal projection, D x H
  ParamBlock W1;  // free variant, D x H
  ParamBlock W2;  // free variant, D x H
};

// Linear decoder for the calibrated preference; the output passes through a
// sigmoid so downstream fusion can treat it as a probability.
class CalibratedDecoder {
 public:
  struct Cache {
    Affine::Cache aff;
    double value = 0.0;
  };

  CalibratedDecoder() = default;
  CalibratedDecoder(std::size_t hidden, Rng& rng)
      : dec_("edit.decoder", 1, hidden, rng) {}

  double forward(std::span<const double> e_pc, Cache& c) const {
    auto logit = dec_.forward(e_pc, c.aff);
    c.value = sigmoid(logit[0]);
    return c.value;
  }
  // Returns d e_pc.
  std::span<const double> backward(double d_value, Cache& c) {
    const double dl[1] = {d_value * sigmoid_grad_from_value(c.value)};
    return dec_.backward(std::span<const double>(dl, 1), c.aff);
  }

  void collect(std::vector<ParamBlock*>& out) { dec_.collect(out); }
  Affine& decoder() { return dec_; }

 private:
  Affine dec_;
};

// Learnable fusion: global bilinear weights over the four statuses plus the
// per-example local corrector F in (0, 2) computed from (u, v, q).
class FusionHead {
 public:
  struct Cache {
    Mlp::Cache corrector;
    std::vector<double> joined;
    AreaProbabilities ap;
    double p_c = 0.0, r = 0.0;
    double y_global = 0.0;
    double corr_logit = 0.0, factor = 1.0;
    std::vector<double> du, dv, dq;
    double d_pc = 0.0, d_r = 0.0;
  };

  FusionHead() = default;
  FusionHead(std::size_t embed, double delta, std::array<double, 2> alpha_init,
             std::array<double, 2> beta_init, Rng& rng);

  double delta() const { return delta_; }

  double global(double p_c, double r, Cache& c) const;
  // Accumulates alpha/beta grads; adds into c.d_pc and c.d_r.
  void global_backward(double d_yg, Cache& c);

  // F = 2 sigmoid(corrector(u, v, q)); only the triple enters the forward.
  double local_factor(const EncodedTriple& x, Cache& c) const;
  // Fills c.du / c.dv / c.dq.
  void local_backward(double d_factor, Cache& c);

  void collect(std::vector<ParamBlock*>& out) {
    out.push_back(&alpha);
    out.push_back(&beta);
    corrector_.collect(out);
  }

  ParamBlock alpha;  // (alpha_1, alpha_0)
  ParamBlock beta;   // (beta_1, beta_0)
  Mlp& corrector() { return corrector_; }

 private:
  double delta_ = 1.0;
  Mlp corrector_;  // 3*embed -> hidden -> 1
};

}  // namespace drp
