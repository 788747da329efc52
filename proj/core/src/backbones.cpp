#include "drp/backbones.hpp"

#include "drp/error.hpp"

namespace drp {

RelevanceKind relevance_kind_from(const std::string& s) {
  if (s == "DSSM") return RelevanceKind::DSSM;
  if (s == "QEM") return RelevanceKind::QEM;
  if (s == "HEM") return RelevanceKind::HEM;
  throw ConfigError("unknown relevance backbone '" + s + "'");
}

PreferenceKind preference_kind_from(const std::string& s) {
  if (s == "MLP") return PreferenceKind::MLP;
  if (s == "DCN") return PreferenceKind::DCN;
  throw ConfigError("unknown preference backbone '" + s + "'");
}

std::string to_string(RelevanceKind k) {
  switch (k) {
    case RelevanceKind::DSSM: return "DSSM";
    case RelevanceKind::QEM: return "QEM";
    case RelevanceKind::HEM: return "HEM";
  }
  return "?";
}

std::string to_string(PreferenceKind k) {
  return k == PreferenceKind::MLP ? "MLP" : "DCN";
}

RelevanceBackbone::RelevanceBackbone(RelevanceKind kind,
                                     const BackboneDims& dims, Rng& rng)
    : kind_(kind),
      dims_(dims),
      decoder_("rm.decoder", 1, dims.hidden, rng) {
  switch (kind) {
    case RelevanceKind::DSSM:
      tower_q_ = Mlp("rm.tower_q", {dims.embed, dims.hidden1, dims.hidden},
                     rng, /*relu_last=*/true);
      tower_v_ = Mlp("rm.tower_v", {dims.embed, dims.hidden1, dims.hidden},
                     rng, /*relu_last=*/true);
      break;
    case RelevanceKind::QEM:
      tower_ = Mlp("rm.tower", {2 * dims.embed, dims.hidden1, dims.hidden},
                   rng, /*relu_last=*/true);
      break;
    case RelevanceKind::HEM:
      tower_ = Mlp("rm.tower", {2 * dims.embed, dims.hidden1, dims.hidden},
                   rng, /*relu_last=*/true);
      lambda_ = ParamBlock("rm.lambda", Tensor({1}));
      break;
  }
}

void RelevanceBackbone::collect(std::vector<ParamBlock*>& out) {
  switch (kind_) {
    case RelevanceKind::DSSM:
      tower_q_.collect(out);
      tower_v_.collect(out);
      break;
    case RelevanceKind::QEM:
      tower_.collect(out);
      break;
    case RelevanceKind::HEM:
      tower_.collect(out);
      out.push_back(&lambda_);
      break;
  }
  decoder_.collect(out);
}

BackboneOut RelevanceBackbone::forward(const EncodedTriple& x,
                                       Cache& c) const {
  const std::size_t d = dims_.embed;
  std::span<const double> hidden;
  switch (kind_) {
    case RelevanceKind::DSSM: {
      auto tq = tower_q_.forward(x.q, c.tower_q);
      auto tv = tower_v_.forward(x.v, c.tower_v);
      c.hidden.resize(dims_.hidden);
      for (std::size_t i = 0; i < dims_.hidden; ++i) c.hidden[i] = tq[i] * tv[i];
      hidden = c.hidden;
      break;
    }
    case RelevanceKind::QEM: {
      c.joined.resize(2 * d);
      for (std::size_t i = 0; i < d; ++i) c.joined[i] = x.q[i];
      for (std::size_t i = 0; i < d; ++i) c.joined[d + i] = x.v[i];
      hidden = tower_.forward(c.joined, c.tower);
      break;
    }
    case RelevanceKind::HEM: {
      // m = sigmoid(lambda) * q + (1 - sigmoid(lambda)) * u
      const double s = sigmoid(lambda_.value[0]);
      c.mix.resize(d);  // holds q - u for the backward pass
      c.joined.resize(2 * d);
      for (std::size_t i = 0; i < d; ++i) {
        c.mix[i] = x.q[i] - x.u[i];
        c.joined[i] = s * x.q[i] + (1.0 - s) * x.u[i];
        c.joined[d + i] = x.v[i];
      }
      hidden = tower_.forward(c.joined, c.tower);
      break;
    }
  }
  auto logit = decoder_.forward(hidden, c.dec);
  c.logit = logit[0];
  c.effect = sigmoid(c.logit);
  return BackboneOut{c.effect, c.logit, hidden};
}

void RelevanceBackbone::backward(double d_effect,
                                 std::span<const double> d_hidden, Cache& c) {
  const std::size_t d = dims_.embed;
  const double d_logit = d_effect * sigmoid_grad_from_value(c.effect);
  const double dl[1] = {d_logit};
  auto d_hid_dec = decoder_.backward(std::span<const double>(dl, 1), c.dec);

  std::vector<double> d_hid(dims_.hidden);
  for (std::size_t i = 0; i < dims_.hidden; ++i) {
    d_hid[i] = d_hid_dec[i] + (d_hidden.empty() ? 0.0 : d_hidden[i]);
  }

  c.dq.assign(d, 0.0);
  c.dv.assign(d, 0.0);
  c.du.assign(d, 0.0);

  switch (kind_) {
    case RelevanceKind::DSSM: {
      const auto& tq = c.tower_q.act.back();
      const auto& tv = c.tower_v.act.back();
      std::vector<double> dtq(dims_.hidden), dtv(dims_.hidden);
      for (std::size_t i = 0; i < dims_.hidden; ++i) {
        dtq[i] = d_hid[i] * tv[i];
        dtv[i] = d_hid[i] * tq[i];
      }
      auto dq = tower_q_.backward(dtq, c.tower_q);
      auto dv = tower_v_.backward(dtv, c.tower_v);
      c.dq.assign(dq.begin(), dq.end());
      c.dv.assign(dv.begin(), dv.end());
      break;
    }
    case RelevanceKind::QEM: {
      auto dj = tower_.backward(d_hid, c.tower);
      for (std::size_t i = 0; i < d; ++i) c.dq[i] = dj[i];
      for (std::size_t i = 0; i < d; ++i) c.dv[i] = dj[d + i];
      break;
    }
    case RelevanceKind::HEM: {
      auto dj = tower_.backward(d_hid, c.tower);
      const double s = sigmoid(lambda_.value[0]);
      double d_s = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double dm = dj[i];
        c.dq[i] = s * dm;
        c.du[i] = (1.0 - s) * dm;
        c.dv[i] = dj[d + i];
        d_s += dm * c.mix[i];  // c.mix holds q - u
      }
      lambda_.grad[0] += d_s * s * (1.0 - s);
      break;
    }
  }
}

PreferenceBackbone::PreferenceBackbone(PreferenceKind kind,
                                       const BackboneDims& dims, Rng& rng)
    : kind_(kind),
      dims_(dims),
      decoder_("pm.decoder", 1, dims.hidden, rng) {
  const std::size_t in = 3 * dims.embed;
  switch (kind) {
    case PreferenceKind::MLP:
      mlp_ = Mlp("pm.mlp", {in, dims.hidden1, dims.hidden}, rng,
                 /*relu_last=*/true);
      break;
    case PreferenceKind::DCN:
      cross0_ = CrossLayer("pm.cross0", in, rng);
      cross1_ = CrossLayer("pm.cross1", in, rng);
      deep_ = Mlp("pm.deep", {in, dims.hidden1, dims.hidden}, rng,
                  /*relu_last=*/true);
      proj_ = Affine("pm.proj", dims.hidden, in + dims.hidden, rng);
      break;
  }
}

void PreferenceBackbone::collect(std::vector<ParamBlock*>& out) {
  switch (kind_) {
    case PreferenceKind::MLP:
      mlp_.collect(out);
      break;
    case PreferenceKind::DCN:
      cross0_.collect(out);
      cross1_.collect(out);
      deep_.collect(out);
      proj_.collect(out);
      break;
  }
  decoder_.collect(out);
}

BackboneOut PreferenceBackbone::forward(const EncodedTriple& x,
                                        Cache& c) const {
  const std::size_t d = dims_.embed;
  c.x0.resize(3 * d);
  for (std::size_t i = 0; i < d; ++i) c.x0[i] = x.q[i];
  for (std::size_t i = 0; i < d; ++i) c.x0[d + i] = x.v[i];
  for (std::size_t i = 0; i < d; ++i) c.x0[2 * d + i] = x.u[i];

  std::span<const double> hidden;
  switch (kind_) {
    case PreferenceKind::MLP:
      hidden = mlp_.forward(c.x0, c.mlp);
      break;
    case PreferenceKind::DCN: {
      auto x1 = cross0_.forward(c.x0, c.x0, c.cross0);
      auto x2 = cross1_.forward(c.x0, x1, c.cross1);
      auto deep = deep_.forward(c.x0, c.deep);
      c.joined.resize(x2.size() + deep.size());
      for (std::size_t i = 0; i < x2.size(); ++i) c.joined[i] = x2[i];
      for (std::size_t i = 0; i < deep.size(); ++i) c.joined[x2.size() + i] = deep[i];
      hidden = proj_.forward(c.joined, c.proj);
      break;
    }
  }
  auto logit = decoder_.forward(hidden, c.dec);
  c.logit = logit[0];
  c.effect = sigmoid(c.logit);
  return BackboneOut{c.effect, c.logit, hidden};
}

void PreferenceBackbone::backward(double d_effect,
                                  std::span<const double> d_hidden, Cache& c) {
  const std::size_t d = dims_.embed;
  const double d_logit = d_effect * sigmoid_grad_from_value(c.effect);
  const double dl[1] = {d_logit};
  auto d_hid_dec = decoder_.backward(std::span<const double>(dl, 1), c.dec);

  std::vector<double> d_hid(dims_.hidden);
  for (std::size_t i = 0; i < dims_.hidden; ++i) {
    d_hid[i] = d_hid_dec[i] + (d_hidden.empty() ? 0.0 : d_hidden[i]);
  }

  std::vector<double> dx0(3 * d, 0.0);
  switch (kind_) {
    case PreferenceKind::MLP: {
      auto dx = mlp_.backward(d_hid, c.mlp);
      dx0.assign(dx.begin(), dx.end());
      break;
    }
    case PreferenceKind::DCN: {
      const std::size_t in = 3 * d;
      auto djoined = proj_.backward(d_hid, c.proj);
      auto d_x2 = djoined.subspan(0, in);
      auto d_deep = djoined.subspan(in, dims_.hidden);
      auto d_deep_in = deep_.backward(d_deep, c.deep);
      axpy(1.0, d_deep_in, dx0);
      cross1_.backward(c.x0, d_x2, c.cross1);
      axpy(1.0, c.cross1.dx0, dx0);
      cross0_.backward(c.x0, c.cross1.dx, c.cross0);
      axpy(1.0, c.cross0.dx0, dx0);
      axpy(1.0, c.cross0.dx, dx0);  // x enters cross0 as both x0 and x
      break;
    }
  }

  c.dq.assign(dx0.begin(), dx0.begin() + d);
  c.dv.assign(dx0.begin() + d, dx0.begin() + 2 * d);
  c.du.assign(dx0.begin() + 2 * d, dx0.end());
}

}  // namespace drp
