#include "drp/synthworld.hpp"

#include <algorithm>
#include <cmath>

#include "drp/error.hpp"
#include "drp/nn.hpp"

namespace drp {

namespace {
constexpr std::uint64_t kTagRelevance = 0x52454cULL;
constexpr std::uint64_t kTagPreference = 0x505245ULL;
constexpr std::uint64_t kTagSensitivity = 0x53454eULL;
constexpr std::uint64_t kTagSession = 0x534553ULL;
constexpr std::uint64_t kTagLatent = 0x4c4154ULL;

// Uniform in [0,1) as a pure function of (seed, tag, a, b).
double hash_uniform(std::uint64_t seed, std::uint64_t tag, std::uint64_t a,
                    std::uint64_t b) {
  return double(hash_mix(seed, tag, a, b) >> 11) * 0x1.0p-53;
}
}  // namespace

int label_area(int p, int r, int b) {
  if (p == 0 && r == 0 && b == 1) {
    throw ContradictionError(
        "triple (P=0, R=0, B=1) contradicts the causal assumptions");
  }
  if (p == 1 && r == 1 && b == 0) {
    throw ContradictionError(
        "triple (P=1, R=1, B=0) contradicts the causal assumptions");
  }
  if (p == 0 && r == 0) return 0;
  if (p == 1 && r == 0) return b ? 2 : 1;
  if (p == 1 && r == 1) return 3;
  return b ? 4 : 5;
}

SynthWorld::SynthWorld(const WorldConfig& cfg) : cfg_(cfg) {
  if (cfg.users < 1 || cfg.queries < 1 || cfg.items < 1 ||
      cfg.latent_dim < 1 || cfg.interactions < 1 || cfg.session_size < 1) {
    throw GenerationError("world config requires positive counts");
  }
  if (cfg.gamma < 0.0 || cfg.gamma > 1.0 || cfg.pi_p < 0.0 || cfg.pi_p > 1.0 ||
      cfg.pi_r < 0.0 || cfg.pi_r > 1.0) {
    throw GenerationError("world config probabilities out of range");
  }

  Rng latent_rng(hash_mix(cfg.seed, kTagLatent));
  const std::size_t k = cfg.latent_dim;
  z_user_.resize(cfg.users * k);
  z_query_.resize(cfg.queries * k);
  z_item_.resize(cfg.items * k);
  for (auto& z : z_user_) z = latent_rng.normal();
  for (auto& z : z_query_) z = latent_rng.normal();
  for (auto& z : z_item_) z = latent_rng.normal();

  // Head-skewed item exposure, the shape search logs actually have. The
  // skew is independent of the latents, so it changes observation counts
  // per item without touching the causal law.
  if (cfg.zipf_s < 0.0) throw GenerationError("zipf_s must be >= 0");
  exposure_cdf_.resize(cfg.items);
  double total = 0.0;
  for (std::size_t i = 0; i < cfg.items; ++i) {
    total += std::pow(double(i + 1), -cfg.zipf_s);
    exposure_cdf_[i] = total;
  }
  for (auto& c : exposure_cdf_) c /= total;

  calibrate_intercept();
  summary_.calibrated_intercept = intercept_;
}

void SynthWorld::calibrate_intercept() {
  // Bisection on the intercept; the slope alone cannot move the marginal
  // relevance off 1/2 because the latent dot products are symmetric.
  Rng rng(hash_mix(cfg_.seed, kTagLatent, 1));
  const std::size_t k = cfg_.latent_dim;
  const std::size_t samples = 20000;
  std::vector<double> dots(samples);
  for (auto& d : dots) {
    const std::size_t q = rng.below(cfg_.queries);
    const std::size_t i = rng.below(cfg_.items);
    d = dot(std::span(z_query_).subspan(q * k, k),
            std::span(z_item_).subspan(i * k, k));
  }
  double lo = -30.0, hi = 30.0;
  for (int iter = 0; iter < 80; ++iter) {
    const double mid = 0.5 * (lo + hi);
    double mean = 0.0;
    for (double d : dots) mean += sigmoid(cfg_.slope * d + mid);
    mean /= double(samples);
    (mean > cfg_.relevance_rate ? hi : lo) = mid;
  }
  intercept_ = 0.5 * (lo + hi);
}

double SynthWorld::relevance_prob(std::size_t query, std::size_t item) const {
  const std::size_t k = cfg_.latent_dim;
  const double d = dot(std::span(z_query_).subspan(query * k, k),
                       std::span(z_item_).subspan(item * k, k));
  return sigmoid(cfg_.slope * d + intercept_);
}

double SynthWorld::preference_logit(std::size_t user, std::size_t item) const {
  const std::size_t k = cfg_.latent_dim;
  const double d = dot(std::span(z_user_).subspan(user * k, k),
                       std::span(z_item_).subspan(item * k, k));
  return cfg_.slope * d + intercept_;
}

bool SynthWorld::relevant(std::size_t query, std::size_t item) const {
  return hash_uniform(cfg_.seed, kTagRelevance, query, item) <
         relevance_prob(query, item);
}

bool SynthWorld::preferred(std::size_t user, std::size_t item,
                           bool item_relevant) const {
  // Relevance boosts the preference logit (the R -> P arrow). The shared
  // uniform couples the two worlds monotonically: relevance can flip a
  // preference only from 0 to 1.
  double logit = preference_logit(user, item);
  if (item_relevant) logit += cfg_.gamma * cfg_.rp_boost;
  return hash_uniform(cfg_.seed, kTagPreference, user, item) < sigmoid(logit);
}

double SynthWorld::sensitivity(std::size_t user, std::size_t query) const {
  Rng rng(hash_mix(cfg_.seed, kTagSensitivity, user, query));
  return rng.beta(cfg_.sens_alpha, cfg_.sens_beta);
}

std::size_t SynthWorld::draw_item(Rng& rng) const {
  if (cfg_.zipf_s == 0.0) return rng.below(cfg_.items);
  const double u = rng.uniform();
  const auto it =
      std::lower_bound(exposure_cdf_.begin(), exposure_cdf_.end(), u);
  return std::size_t(it - exposure_cdf_.begin());
}

std::size_t SynthWorld::draw_relevant_item(std::size_t query, Rng& rng) const {
  for (int attempt = 0; attempt < 4096; ++attempt) {
    const std::size_t item = draw_item(rng);
    if (relevant(query, item)) return item;
  }
  // Rejection failed; scan the catalog once before giving up.
  const std::size_t start = rng.below(cfg_.items);
  for (std::size_t off = 0; off < cfg_.items; ++off) {
    const std::size_t item = (start + off) % cfg_.items;
    if (relevant(query, item)) return item;
  }
  throw GenerationError("query " + std::to_string(query) +
                        " has no relevant item but gamma > 0");
}

std::vector<SessionExample> SynthWorld::generate() {
  std::vector<SessionExample> out;
  out.reserve(cfg_.interactions);
  std::vector<std::vector<std::int64_t>> history(cfg_.users);

  const std::size_t n_sessions =
      (cfg_.interactions + cfg_.session_size - 1) / cfg_.session_size;

  std::size_t pos_count = 0;
  double sens_sum = 0.0;
  double p_sum = 0.0, r_sum = 0.0, pr_sum = 0.0;
  std::int64_t timestamp = 0;

  for (std::size_t s = 0; s < n_sessions && out.size() < cfg_.interactions;
       ++s) {
    Rng rng(hash_mix(cfg_.seed, kTagSession, s));
    const std::size_t user = rng.below(cfg_.users);
    const std::size_t query = rng.below(cfg_.queries);
    const double s_uq = sensitivity(user, query);

    for (std::size_t j = 0;
         j < cfg_.session_size && out.size() < cfg_.interactions; ++j) {
      std::size_t item;
      if (cfg_.gamma > 0.0 && rng.bernoulli(cfg_.gamma)) {
        item = draw_relevant_item(query, rng);
      } else {
        item = draw_item(rng);
      }

      const bool R = relevant(query, item);
      const bool P = preferred(user, item, R);

      int y;
      if (P && R) {
        y = 1;
      } else if (P && !R) {
        y = rng.bernoulli(cfg_.pi_p) ? 1 : 0;
      } else if (!P && R) {
        y = rng.bernoulli(cfg_.pi_r * s_uq) ? 1 : 0;
      } else {
        y = 0;
      }

      SessionExample ex;
      ex.user_id = std::int64_t(user);
      ex.query_id = std::int64_t(query);
      ex.item_id = std::int64_t(item);
      ex.history = history[user];
      ex.label = y;
      ex.timestamp = ++timestamp;
      ex.session_id = std::int64_t(s);
      ex.oracle_p = P ? 1 : 0;
      ex.oracle_r = R ? 1 : 0;
      ex.sensitivity = s_uq;
      ex.area = label_area(P, R, y);

      if (y) history[user].push_back(std::int64_t(item));

      summary_.area_counts[*ex.area]++;
      pos_count += y;
      sens_sum += s_uq;
      p_sum += P;
      r_sum += R;
      pr_sum += (P && R);
      out.push_back(std::move(ex));
    }
  }

  const double n = double(out.size());
  const double ep = p_sum / n, er = r_sum / n;
  const double cov = pr_sum / n - ep * er;
  const double var = std::sqrt(ep * (1 - ep) * er * (1 - er));
  summary_.pr_correlation = var > 0.0 ? cov / var : 0.0;
  summary_.positive_rate = double(pos_count) / n;
  summary_.mean_sensitivity = sens_sum / n;
  return out;
}

FeatureSpec SynthWorld::feature_spec() const {
  return FeatureSpec{cfg_.users, cfg_.queries, cfg_.items, 64};
}

WorldSummary summarize(const std::vector<SessionExample>& examples) {
  WorldSummary s;
  double p_sum = 0.0, r_sum = 0.0, pr_sum = 0.0, pos = 0.0, sens = 0.0;
  for (const auto& ex : examples) {
    if (ex.area) s.area_counts[*ex.area]++;
    const double p = ex.oracle_p.value_or(0);
    const double r = ex.oracle_r.value_or(0);
    p_sum += p;
    r_sum += r;
    pr_sum += p * r;
    pos += ex.label;
    sens += ex.sensitivity.value_or(0.0);
  }
  const double n = double(examples.size());
  if (n > 0) {
    const double ep = p_sum / n, er = r_sum / n;
    const double cov = pr_sum / n - ep * er;
    const double var = std::sqrt(ep * (1 - ep) * er * (1 - er));
    s.pr_correlation = var > 0.0 ? cov / var : 0.0;
    s.positive_rate = pos / n;
    s.mean_sensitivity = sens / n;
  }
  return s;
}

}  // namespace drp
