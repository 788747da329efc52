#pragma once

#include <string>
#include <vector>

#include "drp/encoding.hpp"
#include "drp/nn.hpp"

namespace drp {

enum class RelevanceKind { DSSM, QEM, HEM };
enum class PreferenceKind { MLP, DCN };

RelevanceKind relevance_kind_from(const std::string& s);
PreferenceKind preference_kind_from(const std::string& s);
std::string to_string(RelevanceKind k);
std::string to_string(PreferenceKind k);

struct BackboneDims {
  std::size_t embed = 64;   // dimension of q, v, u
  std::size_t hidden1 = 64; // first prediction-layer width
  std::size_t hidden = 32;  // H, the last-layer representation width
};

// Scalar effect in (0,1) plus the last-layer hidden representation that the
// editing stage intervenes on. effect == sigmoid(decoder(hidden)) always.
struct BackboneOut {
  double effect = 0.0;
  double logit = 0.0;
  std::span<const double> hidden;
};

// Relevance model r-hat = RM(q, v); the HEM flavor also sees u through a
// learned scalar mixture between q and u.
class RelevanceBackbone {
 public:
  struct Cache {
    Mlp::Cache tower_q, tower_v, tower;
    Affine::Cache dec;
    std::vector<double> hidden;
    std::vector<double> joined;
    std::vector<double> mix;
    std::vector<double> dq, dv, du;
    double logit = 0.0;
    double effect = 0.0;
  };

  RelevanceBackbone() = default;
  RelevanceBackbone(RelevanceKind kind, const BackboneDims& dims, Rng& rng);

  BackboneOut forward(const EncodedTriple& x, Cache& c) const;
  // d_effect is dL/d(effect); d_hidden an extra gradient arriving directly at
  // the hidden representation (from the editing path). Results in c.dq/dv/du.
  void backward(double d_effect, std::span<const double> d_hidden, Cache& c);

  RelevanceKind kind() const { return kind_; }
  std::size_t hidden_dim() const { return dims_.hidden; }
  void collect(std::vector<ParamBlock*>& out);

  Affine& decoder() { return decoder_; }
  ParamBlock& mix_weight() { return lambda_; }

 private:
  RelevanceKind kind_ = RelevanceKind::DSSM;
  BackboneDims dims_;
  Mlp tower_q_, tower_v_;  // DSSM
  Mlp tower_;              // QEM / HEM
  ParamBlock lambda_;      // HEM mixture logit
  Affine decoder_;
};

// Preference model p-hat = PM(q, v, u).
class PreferenceBackbone {
 public:
  struct Cache {
    Mlp::Cache mlp, deep;
    CrossLayer::Cache cross0, cross1;
    Affine::Cache proj, dec;
    std::vector<double> x0;
    std::vector<double> joined;
    std::vector<double> dq, dv, du;
    double logit = 0.0;
    double effect = 0.0;
  };

  PreferenceBackbone() = default;
  PreferenceBackbone(PreferenceKind kind, const BackboneDims& dims, Rng& rng);

  BackboneOut forward(const EncodedTriple& x, Cache& c) const;
  void backward(double d_effect, std::span<const double> d_hidden, Cache& c);

  PreferenceKind kind() const { return kind_; }
  std::size_t hidden_dim() const { return dims_.hidden; }
  void collect(std::vector<ParamBlock*>& out);

  Affine& decoder() { return decoder_; }
  CrossLayer& cross(std::size_t i) { return i == 0 ? cross0_ : cross1_; }

 private:
  PreferenceKind kind_ = PreferenceKind::MLP;
  BackboneDims dims_;
  Mlp mlp_;                 // MLP flavor
  CrossLayer cross0_, cross1_;
  Mlp deep_;                // DCN deep branch
  Affine proj_;             // DCN combiner -> hidden
  Affine decoder_;
};

}  // namespace drp
