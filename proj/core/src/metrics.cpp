#include "drp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "drp/error.hpp"
#include "drp/reconstruction.hpp"

namespace drp {

namespace {
std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

double auc(std::span<const double> scores, std::span<const int> labels) {
  std::size_t pos = 0, neg = 0;
  for (int y : labels) (y ? pos : neg)++;
  if (pos == 0 || neg == 0) {
    throw MetricError("AUC undefined: labels contain a single class");
  }

  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // Average ranks over tied blocks, then the Mann-Whitney statistic.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * double(i + 1 + j);  // 1-based average
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) rank_sum_pos += avg_rank;
    }
    i = j;
  }
  const double u = rank_sum_pos - 0.5 * double(pos) * double(pos + 1);
  return u / (double(pos) * double(neg));
}

double logloss(std::span<const double> scores, std::span<const int> labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double y_hat = clamp_score(scores[i]);
    total += labels[i] ? -std::log(y_hat) : -std::log(1.0 - y_hat);
  }
  return scores.empty() ? 0.0 : total / double(scores.size());
}

RankingResult ranking_metrics(std::span<const std::int64_t> session_ids,
                              std::span<const double> scores,
                              std::span<const int> labels,
                              std::size_t cutoff) {
  std::map<std::int64_t, std::vector<std::size_t>> sessions;
  for (std::size_t i = 0; i < session_ids.size(); ++i) {
    sessions[session_ids[i]].push_back(i);
  }

  double ndcg_sum = 0.0, hr_sum = 0.0;
  std::size_t qualifying = 0;
  for (auto& [sid, idx] : sessions) {
    std::size_t positives = 0;
    for (auto i : idx) positives += labels[i] != 0;
    if (positives == 0) continue;  // only sessions with positives count
    ++qualifying;

    // Stable sort keeps original order among equal scores.
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return scores[a] > scores[b];
    });

    const std::size_t k = std::min(cutoff, idx.size());
    double dcg = 0.0;
    bool hit = false;
    for (std::size_t r = 0; r < k; ++r) {
      if (labels[idx[r]]) {
        dcg += 1.0 / std::log2(double(r) + 2.0);  // gain 2^1 - 1 = 1
        hit = true;
      }
    }
    double idcg = 0.0;
    for (std::size_t r = 0; r < std::min(k, positives); ++r) {
      idcg += 1.0 / std::log2(double(r) + 2.0);
    }
    ndcg_sum += dcg / idcg;
    hr_sum += hit ? 1.0 : 0.0;
  }

  if (qualifying == 0) {
    throw MetricError("ranking metrics undefined: no session has positives");
  }
  return {ndcg_sum / double(qualifying), hr_sum / double(qualifying),
          qualifying};
}

MetricsReport compute_metrics(std::span<const std::int64_t> session_ids,
                              std::span<const double> scores,
                              std::span<const int> labels,
                              std::size_t cutoff) {
  MetricsReport r;
  r.auc = auc(scores, labels);
  r.logloss = logloss(scores, labels);
  const auto rank = ranking_metrics(session_ids, scores, labels, cutoff);
  r.ndcg_at_10 = rank.ndcg;
  r.hr_at_10 = rank.hr;
  r.scored_examples = scores.size();
  r.qualifying_sessions = rank.qualifying_sessions;
  return r;
}

std::string MetricsReport::to_csv() const {
  std::ostringstream os;
  os << "auc,logloss,ndcg_at_10,hr_at_10,scored_examples,qualifying_sessions\n";
  os << fmt_double(auc) << ',' << fmt_double(logloss) << ','
     << fmt_double(ndcg_at_10) << ',' << fmt_double(hr_at_10) << ','
     << scored_examples << ',' << qualifying_sessions << '\n';
  return os.str();
}

std::string MetricsReport::to_json() const {
  std::ostringstream os;
  os << "{\"auc\":" << fmt_double(auc) << ",\"logloss\":" << fmt_double(logloss)
     << ",\"ndcg_at_10\":" << fmt_double(ndcg_at_10)
     << ",\"hr_at_10\":" << fmt_double(hr_at_10)
     << ",\"scored_examples\":" << scored_examples
     << ",\"qualifying_sessions\":" << qualifying_sessions << "}";
  return os.str();
}

double percentile_threshold(std::vector<double> values, double quantile) {
  if (values.empty()) throw MetricError("percentile of empty range");
  std::sort(values.begin(), values.end());
  std::size_t idx = std::size_t(std::floor(quantile * double(values.size())));
  if (idx >= values.size()) idx = values.size() - 1;
  return values[idx];
}

namespace {
void add(HeatmapTable::Cell& cell, const StagePredictions& p) {
  cell.mean_fixed += p.fixed;
  cell.mean_global += p.global_score;
  cell.mean_local += p.local_score;
  cell.count += 1;
}

void finalize(HeatmapTable& t) {
  auto norm = [](HeatmapTable::Cell& c) {
    if (c.count == 0) return;
    c.mean_fixed /= double(c.count);
    c.mean_global /= double(c.count);
    c.mean_local /= double(c.count);
  };
  for (auto& c : t.areas) norm(c);
  norm(t.contradictions);
  for (const auto& c : t.areas) {
    if (c.count < 10) t.low_count_warning = true;
  }
}
}  // namespace

HeatmapTable heatmap_oracle(std::span<const int> area_ids,
                            std::span<const StagePredictions> preds) {
  HeatmapTable t;
  for (std::size_t i = 0; i < area_ids.size(); ++i) {
    const int a = area_ids[i];
    if (a < 0 || a > 5) {
      throw ContradictionError("area id " + std::to_string(a) +
                               " outside 0..5");
    }
    add(t.areas[a], preds[i]);
  }
  finalize(t);
  return t;
}

HeatmapTable heatmap_by_scores(std::span<const double> relevance,
                               std::span<const double> preference,
                               std::span<const int> labels,
                               std::span<const StagePredictions> preds) {
  HeatmapTable t;
  t.score_mode = true;
  const double r_thr = percentile_threshold(
      std::vector<double>(relevance.begin(), relevance.end()), 0.8);
  const double p_thr = percentile_threshold(
      std::vector<double>(preference.begin(), preference.end()), 0.8);

  for (std::size_t i = 0; i < relevance.size(); ++i) {
    const int R = relevance[i] >= r_thr ? 1 : 0;
    const int P = preference[i] >= p_thr ? 1 : 0;
    const int B = labels[i] ? 1 : 0;
    if ((P == 0 && R == 0 && B == 1) || (P == 1 && R == 1 && B == 0)) {
      add(t.contradictions, preds[i]);
      continue;
    }
    // same mapping as label_area, inlined to avoid throwing here
    int area = 0;
    if (P == 0 && R == 0) area = 0;
    else if (P == 1 && R == 0) area = B ? 2 : 1;
    else if (P == 1 && R == 1) area = 3;
    else area = B ? 4 : 5;
    add(t.areas[area], preds[i]);
  }
  finalize(t);
  return t;
}

std::string HeatmapTable::to_csv() const {
  std::ostringstream os;
  os << "bucket,count,mean_fixed,mean_global,mean_local\n";
  for (int a = 0; a < 6; ++a) {
    const auto& c = areas[a];
    os << "area" << a << ',' << c.count << ',' << fmt_double(c.mean_fixed)
       << ',' << fmt_double(c.mean_global) << ',' << fmt_double(c.mean_local)
       << '\n';
  }
  if (score_mode) {
    os << "contradiction," << contradictions.count << ','
       << fmt_double(contradictions.mean_fixed) << ','
       << fmt_double(contradictions.mean_global) << ','
       << fmt_double(contradictions.mean_local) << '\n';
  }
  return os.str();
}

std::string HeatmapTable::to_json() const {
  std::ostringstream os;
  os << "{\"areas\":[";
  for (int a = 0; a < 6; ++a) {
    const auto& c = areas[a];
    if (a) os << ',';
    os << "{\"area\":" << a << ",\"count\":" << c.count
       << ",\"mean_fixed\":" << fmt_double(c.mean_fixed)
       << ",\"mean_global\":" << fmt_double(c.mean_global)
       << ",\"mean_local\":" << fmt_double(c.mean_local) << '}';
  }
  os << "],\"score_mode\":" << (score_mode ? "true" : "false")
     << ",\"low_count_warning\":" << (low_count_warning ? "true" : "false");
  if (score_mode) {
    os << ",\"contradictions\":{\"count\":" << contradictions.count
       << ",\"mean_fixed\":" << fmt_double(contradictions.mean_fixed)
       << ",\"mean_global\":" << fmt_double(contradictions.mean_global)
       << ",\"mean_local\":" << fmt_double(contradictions.mean_local) << '}';
  }
  os << '}';
  return os.str();
}

}  // namespace drp
