#include "drp/model.hpp"

#include <cmath>

#include "drp/error.hpp"

namespace drp {

Variant variant_from(const std::string& s) {
  if (s == "FULL") return Variant::FULL;
  if (s == "V1_NON_ORTHO" || s == "V1") return Variant::V1_NON_ORTHO;
  if (s == "V2_NO_FUSION" || s == "V2") return Variant::V2_NO_FUSION;
  if (s == "V3_NO_GLOBAL" || s == "V3") return Variant::V3_NO_GLOBAL;
  if (s == "V4_NO_LOCAL" || s == "V4") return Variant::V4_NO_LOCAL;
  if (s == "V5_NO_EDIT" || s == "V5") return Variant::V5_NO_EDIT;
  if (s == "BASE_FIXED" || s == "BASE") return Variant::BASE_FIXED;
  throw ConfigError("unknown variant '" + s + "'");
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::FULL: return "FULL";
    case Variant::V1_NON_ORTHO: return "V1_NON_ORTHO";
    case Variant::V2_NO_FUSION: return "V2_NO_FUSION";
    case Variant::V3_NO_GLOBAL: return "V3_NO_GLOBAL";
    case Variant::V4_NO_LOCAL: return "V4_NO_LOCAL";
    case Variant::V5_NO_EDIT: return "V5_NO_EDIT";
    case Variant::BASE_FIXED: return "BASE_FIXED";
  }
  return "?";
}

namespace {
bool uses_editing(Variant v) {
  return v == Variant::FULL || v == Variant::V1_NON_ORTHO ||
         v == Variant::V2_NO_FUSION || v == Variant::V3_NO_GLOBAL ||
         v == Variant::V4_NO_LOCAL;
}
bool uses_global(Variant v) {
  return v == Variant::FULL || v == Variant::V1_NON_ORTHO ||
         v == Variant::V4_NO_LOCAL || v == Variant::V5_NO_EDIT;
}
bool uses_local(Variant v) {
  return v == Variant::FULL || v == Variant::V1_NON_ORTHO ||
         v == Variant::V3_NO_GLOBAL || v == Variant::V5_NO_EDIT;
}
}  // namespace

Model::Model(const FeatureSpec& spec, const ModelConfig& cfg,
             std::uint64_t seed)
    : spec_(spec), cfg_(cfg) {
  if (cfg.rank_d > cfg.hidden) {
    throw ConfigError("rank_d must not exceed hidden width");
  }
  spec_.embed_dim = cfg.embed_dim;  // the model config owns the width
  BackboneDims dims{cfg.embed_dim, cfg.hidden1, cfg.hidden};
  // One deterministic stream per component so layout changes in one spot do
  // not reshuffle another component's initialization.
  Rng master(seed);
  Rng r_enc = master.fork(1);
  Rng r_rm = master.fork(2);
  Rng r_pm = master.fork(3);
  Rng r_edit = master.fork(4);
  Rng r_dec = master.fork(5);
  Rng r_fuse = master.fork(6);
  encoder_ = Encoder(spec_, r_enc);
  rm_ = RelevanceBackbone(cfg.relevance, dims, r_rm);
  pm_ = PreferenceBackbone(cfg.preference, dims, r_pm);
  editor_ = PreferenceEditor(cfg.rank_d, cfg.hidden, r_edit);
  dec_ = CalibratedDecoder(cfg.hidden, r_dec);
  fusion_ = FusionHead(cfg.embed_dim, cfg.delta, cfg.alpha_init,
                       cfg.beta_init, r_fuse);
}

StageScores Model::forward(const SessionExample& ex, Variant v,
                           Workspace& ws) const {
  ws.triple = encoder_.encode(ex, ws.enc);
  const auto rm_out = rm_.forward(ws.triple, ws.rm);
  const auto pm_out = pm_.forward(ws.triple, ws.pm);

  StageScores s;
  s.r_hat = rm_out.effect;
  s.p_hat = pm_out.effect;

  if (uses_editing(v)) {
    const bool ortho = v != Variant::V1_NON_ORTHO;
    auto e_pc = editor_.forward(pm_out.hidden, rm_out.hidden, ortho, ws.edit);
    s.p_cal = dec_.forward(e_pc, ws.dec);
  } else {
    s.p_cal = s.p_hat;
  }

  s.fixed = fixed_fusion(s.p_cal, s.r_hat, cfg_.delta);
  s.global_score = uses_global(v) ? fusion_.global(s.p_cal, s.r_hat, ws.fuse)
                                  : s.fixed;

  if (uses_local(v)) {
    const double base = (v == Variant::V3_NO_GLOBAL) ? s.fixed : s.global_score;
    const double f = fusion_.local_factor(ws.triple, ws.fuse);
    s.local_score = base * f;
  } else {
    s.local_score = s.global_score;
  }

  const double raw = s.local_score;
  s.final_score = clamp_score(raw);
  ws.clamped = raw != s.final_score;
  ws.scores = s;
  return s;
}

void Model::backward(double d_final, Variant v, Workspace& ws) {
  const StageScores& s = ws.scores;
  const std::size_t d = cfg_.embed_dim;
  const std::size_t h = cfg_.hidden;

  ws.dq.assign(d, 0.0);
  ws.dv.assign(d, 0.0);
  ws.du.assign(d, 0.0);
  ws.d_ep.assign(h, 0.0);
  ws.d_er.assign(h, 0.0);
  ws.fuse.d_pc = 0.0;
  ws.fuse.d_r = 0.0;

  // clamp passes no gradient outside the interior
  double g = ws.clamped ? 0.0 : d_final;

  double d_pc = 0.0;
  double d_r = 0.0;

  if (uses_local(v)) {
    const double base = (v == Variant::V3_NO_GLOBAL) ? s.fixed : s.global_score;
    const double d_base = g * ws.fuse.factor;
    const double d_factor = g * base;
    fusion_.local_backward(d_factor, ws.fuse);
    axpy(1.0, ws.fuse.du, ws.du);
    axpy(1.0, ws.fuse.dv, ws.dv);
    axpy(1.0, ws.fuse.dq, ws.dq);
    g = d_base;
  }

  if (v == Variant::V2_NO_FUSION || v == Variant::V3_NO_GLOBAL ||
      v == Variant::BASE_FIXED) {
    // g is d(fixed) = d(r^delta * p_cal)
    const double rpow = std::pow(s.r_hat, cfg_.delta);
    d_pc = g * rpow;
    if (cfg_.delta != 0.0) {
      d_r = g * cfg_.delta * std::pow(s.r_hat, cfg_.delta - 1.0) * s.p_cal;
      // at saturated r the sigmoid derivative annihilates this path anyway
      if (!std::isfinite(d_r)) d_r = 0.0;
    }
  } else {
    fusion_.global_backward(g, ws.fuse);
    d_pc = ws.fuse.d_pc;
    d_r = ws.fuse.d_r;
  }

  double d_p_effect = 0.0;
  if (uses_editing(v)) {
    const bool ortho = v != Variant::V1_NON_ORTHO;
    auto d_epc = dec_.backward(d_pc, ws.dec);
    editor_.backward(d_epc, ortho, ws.edit);
    axpy(1.0, ws.edit.d_ep, ws.d_ep);
    axpy(1.0, ws.edit.d_er, ws.d_er);
  } else {
    d_p_effect = d_pc;  // p_cal aliases the raw preference effect
  }

  rm_.backward(d_r, ws.d_er, ws.rm);
  axpy(1.0, ws.rm.dq, ws.dq);
  axpy(1.0, ws.rm.dv, ws.dv);
  axpy(1.0, ws.rm.du, ws.du);

  pm_.backward(d_p_effect, ws.d_ep, ws.pm);
  axpy(1.0, ws.pm.dq, ws.dq);
  axpy(1.0, ws.pm.dv, ws.dv);
  axpy(1.0, ws.pm.du, ws.du);

  encoder_.backward(ws.dq, ws.dv, ws.du, ws.enc);
}

std::vector<ParamBlock*> Model::params() {
  std::vector<ParamBlock*> out;
  encoder_.collect(out);
  rm_.collect(out);
  pm_.collect(out);
  out.push_back(&editor_.O);
  out.push_back(&editor_.W1);
  out.push_back(&editor_.W2);
  dec_.collect(out);
  fusion_.collect(out);
  return out;
}

std::vector<ParamBlock*> Model::trainable(Variant v) {
  std::vector<ParamBlock*> out;
  encoder_.collect(out);
  rm_.collect(out);
  pm_.collect(out);
  if (uses_editing(v)) {
    if (v == Variant::V1_NON_ORTHO) {
      out.push_back(&editor_.W1);
      out.push_back(&editor_.W2);
    } else {
      out.push_back(&editor_.O);
    }
    dec_.collect(out);
  }
  if (uses_global(v)) {
    out.push_back(&fusion_.alpha);
    out.push_back(&fusion_.beta);
  }
  if (uses_local(v)) {
    fusion_.corrector().collect(out);
  }
  return out;
}

}  // namespace drp
