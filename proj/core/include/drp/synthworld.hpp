#pragma once

#include <cstdint>
#include <vector>

#include "drp/encoding.hpp"

namespace drp {

// Generative search-session world with oracle preference/relevance labels.
//
// Latents z_u, z_q, z_i ~ N(0, I_k). Relevance ground truth per (query,
// item) pair is Bernoulli(sigmoid(slope * <z_q, z_i> + intercept)) with the
// intercept calibrated so the marginal relevance rate hits relevance_rate.
// Preference ground truth per (user, item) uses the same slope/intercept
// plus a logit boost of gamma * rp_boost when the pair's item is relevant
// to the session query (the R -> P causal arrow). Candidate items are drawn
// from the query's relevant pool with probability gamma, uniformly
// otherwise. Behavior follows the area semantics: certain click when both
// effects are positive, Bernoulli(pi_p) for preference-only, Bernoulli(pi_r
// * s_uq) for relevance-only with per-(user, query) sensitivity s_uq ~
// Beta(sens_alpha, sens_beta), and no click when both are negative.
struct WorldConfig {
  std::size_t users = 100;
  std::size_t queries = 50;
  std::size_t items = 500;
  std::size_t latent_dim = 8;
  std::size_t interactions = 10000;
  std::size_t session_size = 10;
  double gamma = 0.5;           // contamination strength in [0,1]
  double pi_p = 0.3;            // positive rate in the P=1, R=0 status
  double pi_r = 0.6;            // base positive rate in the P=0, R=1 status
  double relevance_rate = 0.25; // target marginal relevance
  double slope = 0.6;           // latent dot-product scale
  double rp_boost = 2.0;        // R -> P logit boost, scaled by gamma
  double zipf_s = 0.9;          // item exposure skew; 0 gives uniform draws
  double sens_alpha = 2.0;      // sensitivity Beta parameters
  double sens_beta = 2.0;
  std::uint64_t seed = 1;
};

struct LabeledExample : SessionExample {
  // Oracle fields are always set on generated data; the optional members of
  // SessionExample mirror them for serialization.
};

// Table mapping of (P, R, B) to the area id 0..5. The triples (0,0,1) and
// (1,1,0) contradict the causal assumptions and throw ContradictionError.
int label_area(int p, int r, int b);

struct WorldSummary {
  std::size_t area_counts[6] = {0, 0, 0, 0, 0, 0};
  double pr_correlation = 0.0;  // empirical corr(P*, R*) over impressions
  double positive_rate = 0.0;
  double mean_sensitivity = 0.0;
  double calibrated_intercept = 0.0;
};

class SynthWorld {
 public:
  explicit SynthWorld(const WorldConfig& cfg);

  // Full log, timestamps strictly increasing; deterministic per seed.
  std::vector<SessionExample> generate();

  const WorldSummary& summary() const { return summary_; }
  const WorldConfig& config() const { return cfg_; }
  FeatureSpec feature_spec() const;

  // Ground-truth accessors (deterministic pair functions).
  bool relevant(std::size_t query, std::size_t item) const;
  bool preferred(std::size_t user, std::size_t item, bool item_relevant) const;
  double sensitivity(std::size_t user, std::size_t query) const;

 private:
  double relevance_prob(std::size_t query, std::size_t item) const;
  double preference_logit(std::size_t user, std::size_t item) const;
  std::size_t draw_item(Rng& rng) const;
  std::size_t draw_relevant_item(std::size_t query, Rng& rng) const;
  void calibrate_intercept();

  WorldConfig cfg_;
  std::vector<double> z_user_, z_query_, z_item_;  // row-major latents
  std::vector<double> exposure_cdf_;  // Zipf-weighted item exposure
  double intercept_ = 0.0;
  WorldSummary summary_;
};

WorldSummary summarize(const std::vector<SessionExample>& examples);

}  // namespace drp
