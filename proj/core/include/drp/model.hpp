#pragma once

#include <array>
#include <string>
#include <vector>

#include "drp/backbones.hpp"
#include "drp/encoding.hpp"
#include "drp/reconstruction.hpp"

namespace drp {

// Wiring variants. FULL is the complete method; V1-V5 are its ablations and
// BASE_FIXED is the plain fixed-fusion joint model.
enum class Variant {
  FULL,          // editing + global + local fusion
  V1_NON_ORTHO,  // editing through unconstrained W1/W2, no retraction
  V2_NO_FUSION,  // fixed fusion on the calibrated preference
  V3_NO_GLOBAL,  // local fusion applied to the fixed-fusion score
  V4_NO_LOCAL,   // stop at the global fusion score
  V5_NO_EDIT,    // fusion on the raw preference effect
  BASE_FIXED,    // r^delta * p on raw effects
};

Variant variant_from(const std::string& s);
std::string to_string(Variant v);

struct ModelConfig {
  RelevanceKind relevance = RelevanceKind::DSSM;
  PreferenceKind preference = PreferenceKind::MLP;
  std::size_t embed_dim = 64;
  std::size_t hidden1 = 64;
  std::size_t hidden = 32;  // H
  std::size_t rank_d = 16;  // D
  double delta = 1.0;
  std::array<double, 2> alpha_init{1.0, 0.5};
  std::array<double, 2> beta_init{1.0, 0.5};
};

// Per-example predictions at each fusion stage. Stages a variant does not
// have collapse onto the previous one; final_score is what the variant
// trains and ranks with (clamped to the BCE-safe interior).
struct StageScores {
  double p_hat = 0.0;   // raw preference effect
  double r_hat = 0.0;   // relevance effect
  double p_cal = 0.0;   // calibrated preference (p_hat where editing is off)
  double fixed = 0.0;
  double global_score = 0.0;
  double local_score = 0.0;
  double final_score = 0.0;
};

class Model {
 public:
  struct Workspace {
    Encoder::Cache enc;
    RelevanceBackbone::Cache rm;
    PreferenceBackbone::Cache pm;
    PreferenceEditor::Cache edit;
    CalibratedDecoder::Cache dec;
    FusionHead::Cache fuse;
    EncodedTriple triple;
    StageScores scores;
    bool clamped = false;
    std::vector<double> dq, dv, du, d_ep, d_er;
  };

  Model(const FeatureSpec& spec, const ModelConfig& cfg, std::uint64_t seed);

  StageScores forward(const SessionExample& ex, Variant v, Workspace& ws) const;
  // d_final is dL/d(final_score); consumes the caches left by forward.
  void backward(double d_final, Variant v, Workspace& ws);

  // Projection retraction, applied after optimizer steps for every variant
  // except V1_NON_ORTHO.
  void retract() { editor_.retract(); }

  std::vector<ParamBlock*> params();            // every block, fixed order
  std::vector<ParamBlock*> trainable(Variant v);  // blocks on v's loss path

  const ModelConfig& config() const { return cfg_; }
  const FeatureSpec& feature_spec() const { return spec_; }

  Encoder& encoder() { return encoder_; }
  RelevanceBackbone& relevance() { return rm_; }
  PreferenceBackbone& preference() { return pm_; }
  PreferenceEditor& editor() { return editor_; }
  CalibratedDecoder& calibrated_decoder() { return dec_; }
  FusionHead& fusion() { return fusion_; }

 private:
  FeatureSpec spec_;
  ModelConfig cfg_;
  Encoder encoder_;
  RelevanceBackbone rm_;
  PreferenceBackbone pm_;
  PreferenceEditor editor_;
  CalibratedDecoder dec_;
  FusionHead fusion_;
};

}  // namespace drp
