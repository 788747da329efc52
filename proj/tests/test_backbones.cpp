#include <doctest.h>

#include <cmath>

#include "drp/backbones.hpp"
#include "drp/error.hpp"
#include "drp/gradcheck.hpp"

using namespace drp;

namespace {

constexpr BackboneDims kSmall{8, 6, 4};

struct TripleFixture {
  std::vector<double> q, v, u;
  EncodedTriple triple() const { return {q, v, u}; }
  explicit TripleFixture(std::uint64_t seed, std::size_t d = kSmall.embed) {
    Rng rng(seed);
    q.resize(d);
    v.resize(d);
    u.resize(d);
    for (auto* vec : {&q, &v, &u}) {
      for (auto& x : *vec) x = rng.uniform(-1.0, 1.0);
    }
  }
};

void zero_all(std::vector<ParamBlock*> params) {
  for (auto* p : params) p->value.fill(0.0);
}

}  // namespace

TEST_CASE("kind parsing round-trips and rejects unknowns") {
  CHECK(relevance_kind_from("HEM") == RelevanceKind::HEM);
  CHECK(preference_kind_from("DCN") == PreferenceKind::DCN);
  CHECK_THROWS_AS(relevance_kind_from("BM25"), ConfigError);
  CHECK_THROWS_AS(preference_kind_from("GBDT"), ConfigError);
}

TEST_CASE("zero-weight DSSM predicts 0.5") {
  Rng rng(1);
  RelevanceBackbone rm(RelevanceKind::DSSM, kSmall, rng);
  std::vector<ParamBlock*> params;
  rm.collect(params);
  zero_all(params);
  TripleFixture f(2);
  RelevanceBackbone::Cache c;
  auto out = rm.forward(f.triple(), c);
  CHECK(out.effect == 0.5);
  for (double h : out.hidden) CHECK(h == 0.0);
}

TEST_CASE("zero-weight MLP preference predicts 0.5 with zero hidden") {
  Rng rng(1);
  PreferenceBackbone pm(PreferenceKind::MLP, kSmall, rng);
  std::vector<ParamBlock*> params;
  pm.collect(params);
  zero_all(params);
  TripleFixture f(3);
  PreferenceBackbone::Cache c;
  auto out = pm.forward(f.triple(), c);
  CHECK(out.effect == 0.5);
  for (double h : out.hidden) CHECK(h == 0.0);
}

TEST_CASE("decoder consistency: effect equals sigmoid of decoded hidden") {
  Rng rng(4);
  for (auto kind : {RelevanceKind::DSSM, RelevanceKind::QEM, RelevanceKind::HEM}) {
    RelevanceBackbone rm(kind, kSmall, rng);
    TripleFixture f(5);
    RelevanceBackbone::Cache c;
    auto out = rm.forward(f.triple(), c);
    const auto& dec = rm.decoder();
    double logit = dec.b.value[0];
    for (std::size_t i = 0; i < out.hidden.size(); ++i) {
      logit += dec.W.value[i] * out.hidden[i];
    }
    CHECK(out.effect == doctest::Approx(sigmoid(logit)).epsilon(1e-15));
    CHECK(out.hidden.size() == kSmall.hidden);
  }
}

TEST_CASE("HEM with saturated mixture equals the tower on concat(q, v)") {
  Rng rng(6);
  RelevanceBackbone hem(RelevanceKind::HEM, kSmall, rng);
  hem.mix_weight().value[0] = 1000.0;  // sigmoid -> 1, mixture -> q
  TripleFixture f(7);
  RelevanceBackbone::Cache c;
  auto out_mixed = hem.forward(f.triple(), c);

  TripleFixture g(7);
  g.u = g.q;  // mixture irrelevant when u == q
  RelevanceBackbone::Cache c2;
  auto out_q = hem.forward(g.triple(), c2);
  CHECK(out_mixed.effect == doctest::Approx(out_q.effect).epsilon(1e-12));
}

TEST_CASE("DSSM hidden is the elementwise tower product") {
  Rng rng(8);
  RelevanceBackbone rm(RelevanceKind::DSSM, kSmall, rng);
  TripleFixture f(9);
  RelevanceBackbone::Cache c;
  auto out = rm.forward(f.triple(), c);
  const auto& tq = c.tower_q.act.back();
  const auto& tv = c.tower_v.act.back();
  for (std::size_t i = 0; i < out.hidden.size(); ++i) {
    CHECK(out.hidden[i] == tq[i] * tv[i]);
  }
}

TEST_CASE("cross layer with zero weights is the identity residual") {
  Rng rng(10);
  CrossLayer cross("c", 4, rng);
  cross.w.value.fill(0.0);
  cross.b.value.fill(0.0);
  std::vector<double> x0 = {1.0, -2.0, 0.5, 3.0};
  CrossLayer::Cache c;
  auto y = cross.forward(x0, x0, c);
  for (std::size_t i = 0; i < x0.size(); ++i) CHECK(y[i] == x0[i]);
}

TEST_CASE("cross layer hand evaluation") {
  Rng rng(10);
  CrossLayer cross("c", 2, rng);
  cross.w.value = Tensor({2}, {1.0, 0.0});
  cross.b.value.fill(0.0);
  std::vector<double> x0 = {1.0, 1.0};
  CrossLayer::Cache c;
  auto y = cross.forward(x0, x0, c);
  CHECK(y[0] == 2.0);
  CHECK(y[1] == 2.0);
}

TEST_CASE("DSSM tower swap changes weights only, never shapes") {
  Rng rng(11);
  RelevanceBackbone rm(RelevanceKind::DSSM, kSmall, rng);
  TripleFixture f(12);
  RelevanceBackbone::Cache c;
  auto out = rm.forward(f.triple(), c);
  EncodedTriple swapped{f.v, f.q, f.u};
  RelevanceBackbone::Cache c2;
  auto out2 = rm.forward(swapped, c2);
  CHECK(out.hidden.size() == out2.hidden.size());
  CHECK(std::isfinite(out2.effect));
}

namespace {

template <typename Backbone, typename Kind>
void gradcheck_backbone(Kind kind, std::uint64_t seed, double tol) {
  Rng rng(seed);
  Backbone model(kind, kSmall, rng);
  TripleFixture f(seed + 1);
  typename Backbone::Cache c;
  const int label = 1;
  auto loss = [&] {
    auto out = model.forward(f.triple(), c);
    return -std::log(label ? out.effect : 1.0 - out.effect);
  };
  auto grads = [&] {
    auto out = model.forward(f.triple(), c);
    const double d = (out.effect - label) / (out.effect * (1.0 - out.effect));
    model.backward(d, {}, c);
  };
  std::vector<ParamBlock*> params;
  model.collect(params);
  GradCheckConfig cfg;
  cfg.tolerance = tol;
  auto report = check_gradients(loss, grads, params, cfg);
  INFO("worst ", report.worst_param, " rel err ", report.max_rel_err);
  CHECK(report.pass);
}

}  // namespace

TEST_CASE("every backbone passes the gradient oracle under BCE") {
  gradcheck_backbone<RelevanceBackbone>(RelevanceKind::DSSM, 21, 1e-3);
  gradcheck_backbone<RelevanceBackbone>(RelevanceKind::QEM, 22, 1e-3);
  gradcheck_backbone<RelevanceBackbone>(RelevanceKind::HEM, 23, 1e-3);
  gradcheck_backbone<PreferenceBackbone>(PreferenceKind::MLP, 24, 1e-3);
  gradcheck_backbone<PreferenceBackbone>(PreferenceKind::DCN, 25, 1e-3);
}

TEST_CASE("hidden-path gradients flow when a d_hidden arrives") {
  Rng rng(31);
  PreferenceBackbone pm(PreferenceKind::DCN, kSmall, rng);
  TripleFixture f(32);
  PreferenceBackbone::Cache c;
  std::vector<double> probe(kSmall.hidden);
  Rng prng(33);
  for (auto& x : probe) x = prng.uniform(-1.0, 1.0);

  auto loss = [&] {
    auto out = pm.forward(f.triple(), c);
    return dot(probe, out.hidden);
  };
  auto grads = [&] {
    pm.forward(f.triple(), c);
    pm.backward(0.0, probe, c);
  };
  std::vector<ParamBlock*> params;
  pm.collect(params);
  GradCheckConfig cfg;
  cfg.tolerance = 1e-3;
  auto report = check_gradients(loss, grads, params, cfg);
  CHECK(report.pass);
}
