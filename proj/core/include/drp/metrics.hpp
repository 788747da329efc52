#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace drp {

struct MetricsReport {
  double auc = 0.0;
  double logloss = 0.0;
  double ndcg_at_10 = 0.0;
  double hr_at_10 = 0.0;
  std::size_t scored_examples = 0;
  std::size_t qualifying_sessions = 0;

  std::string to_csv() const;  // fixed column order, header row included
  std::string to_json() const;
};

// Rank-statistic AUC: (concordant + 0.5 * ties) / (pos * neg), O(n log n).
// Throws MetricError when labels contain a single class.
double auc(std::span<const double> scores, std::span<const int> labels);

// Mean logloss; scores are clamped to the BCE-safe interior first.
double logloss(std::span<const double> scores, std::span<const int> labels);

struct RankingResult {
  double ndcg = 0.0;
  double hr = 0.0;
  std::size_t qualifying_sessions = 0;
};

// Sessions without positives are skipped; scores sort descending with ties
// broken by original order. Gains are 2^rel - 1 with log2(rank + 1)
// discounts. Throws MetricError when no session qualifies.
RankingResult ranking_metrics(std::span<const std::int64_t> session_ids,
                              std::span<const double> scores,
                              std::span<const int> labels,
                              std::size_t cutoff = 10);

MetricsReport compute_metrics(std::span<const std::int64_t> session_ids,
                              std::span<const double> scores,
                              std::span<const int> labels,
                              std::size_t cutoff = 10);

// Per-area mean prediction for the fixed, global and local fusion stages.
// Areas 0..5 come from the oracle labels or from thresholded scores; in
// score mode, thresholded triples that the taxonomy forbids land in the
// contradiction bucket instead of being dropped.
struct HeatmapTable {
  struct Cell {
    double mean_fixed = 0.0;
    double mean_global = 0.0;
    double mean_local = 0.0;
    std::size_t count = 0;
  };
  Cell areas[6];
  Cell contradictions;      // score mode only
  bool score_mode = false;
  bool low_count_warning = false;  // some area has fewer than 10 examples

  std::string to_csv() const;
  std::string to_json() const;
};

struct StagePredictions {
  double fixed = 0.0;
  double global_score = 0.0;
  double local_score = 0.0;
};

// Oracle mode: areas attributed from stored area ids.
HeatmapTable heatmap_oracle(std::span<const int> area_ids,
                            std::span<const StagePredictions> preds);

// Score mode: relevance and calibrated preference thresholded at their
// empirical 80th percentiles (inclusive), joined with the behavior label.
HeatmapTable heatmap_by_scores(std::span<const double> relevance,
                               std::span<const double> preference,
                               std::span<const int> labels,
                               std::span<const StagePredictions> preds);

// Inclusive upper-quantile threshold: values >= the returned threshold are
// classified positive; with n distinct values exactly ceil(0.2 n) qualify.
double percentile_threshold(std::vector<double> values, double quantile);

}  // namespace drp
