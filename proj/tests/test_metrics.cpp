#include <doctest.h>

#include <cmath>

#include "drp/error.hpp"
#include "drp/metrics.hpp"
#include "drp/rng.hpp"

using namespace drp;

namespace {

// Independent oracle: exhaustive pair counting.
double auc_brute_force(std::span<const double> scores,
                       std::span<const int> labels) {
  double concordant = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      ++pairs;
      if (scores[i] > scores[j]) {
        concordant += 1.0;
      } else if (scores[i] == scores[j]) {
        concordant += 0.5;
      }
    }
  }
  return concordant / double(pairs);
}

}  // namespace

TEST_CASE("auc separates, fails and ties as specified") {
  {
    const double s[] = {0.9, 0.1};
    const int y[] = {1, 0};
    CHECK(auc(s, y) == 1.0);
  }
  {
    const double s[] = {0.2, 0.8, 0.6};
    const int y[] = {1, 0, 1};
    CHECK(auc(s, y) == 0.0);
  }
  {
    const double s[] = {0.4, 0.4, 0.4, 0.4};
    const int y[] = {1, 0, 1, 0};
    CHECK(auc(s, y) == 0.5);
  }
}

TEST_CASE("auc rejects single-class labels") {
  const double s[] = {0.1, 0.9};
  const int pos[] = {1, 1};
  const int neg[] = {0, 0};
  CHECK_THROWS_AS(auc(s, pos), MetricError);
  CHECK_THROWS_AS(auc(s, neg), MetricError);
}

TEST_CASE("auc equals the brute-force oracle for n <= 8") {
  Rng rng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(7);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    // small discrete score set forces plenty of ties
    for (auto& s : scores) s = double(rng.below(4)) * 0.25;
    bool has_pos = false, has_neg = false;
    for (auto& y : labels) {
      y = int(rng.below(2));
      (y ? has_pos : has_neg) = true;
    }
    if (!has_pos) labels[0] = 1;
    if (!has_neg) labels[labels.size() - 1] = 0;
    CHECK(auc(scores, labels) == auc_brute_force(scores, labels));
  }
}

TEST_CASE("auc is invariant under strictly increasing transforms") {
  Rng rng(78);
  std::vector<double> scores(50);
  std::vector<int> labels(50);
  for (auto& s : scores) s = rng.uniform();
  for (auto& y : labels) y = int(rng.below(2));
  labels[0] = 1;
  labels[1] = 0;
  const double base = auc(scores, labels);
  std::vector<double> mapped(scores);
  for (auto& s : mapped) s = std::exp(3.0 * s) - 0.5;
  CHECK(auc(mapped, labels) == doctest::Approx(base).epsilon(1e-15));
}

TEST_CASE("ranking metrics listed examples") {
  {
    // one positive ranked first of 20
    std::vector<std::int64_t> sess(20, 1);
    std::vector<double> scores(20);
    std::vector<int> labels(20, 0);
    for (int i = 0; i < 20; ++i) scores[i] = 1.0 - 0.01 * i;
    labels[0] = 1;
    auto r = ranking_metrics(sess, scores, labels);
    CHECK(r.ndcg == 1.0);
    CHECK(r.hr == 1.0);
  }
  {
    // one positive ranked 11th: outside the cutoff
    std::vector<std::int64_t> sess(20, 1);
    std::vector<double> scores(20);
    std::vector<int> labels(20, 0);
    for (int i = 0; i < 20; ++i) scores[i] = 1.0 - 0.01 * i;
    labels[10] = 1;
    auto r = ranking_metrics(sess, scores, labels);
    CHECK(r.ndcg == 0.0);
    CHECK(r.hr == 0.0);
  }
  {
    // positives at ranks 2 and 4 of 10
    std::vector<std::int64_t> sess(10, 1);
    std::vector<double> scores(10);
    std::vector<int> labels(10, 0);
    for (int i = 0; i < 10; ++i) scores[i] = 1.0 - 0.01 * i;
    labels[1] = 1;
    labels[3] = 1;
    auto r = ranking_metrics(sess, scores, labels);
    const double expected = (1.0 / std::log2(3.0) + 1.0 / std::log2(5.0)) /
                            (1.0 / std::log2(2.0) + 1.0 / std::log2(3.0));
    CHECK(r.ndcg == doctest::Approx(expected).epsilon(1e-15));
    CHECK(r.hr == 1.0);
  }
}

TEST_CASE("sessions without positives are skipped; none qualifying throws") {
  std::vector<std::int64_t> sess = {1, 1, 2, 2};
  std::vector<double> scores = {0.9, 0.2, 0.8, 0.3};
  std::vector<int> labels = {1, 0, 0, 0};
  auto r = ranking_metrics(sess, scores, labels);
  CHECK(r.qualifying_sessions == 1);

  std::vector<int> none = {0, 0, 0, 0};
  CHECK_THROWS_AS(ranking_metrics(sess, scores, none), MetricError);
}

TEST_CASE("ranking metrics invariant under session permutation") {
  Rng rng(79);
  std::vector<std::int64_t> sess;
  std::vector<double> scores;
  std::vector<int> labels;
  for (std::int64_t s = 0; s < 20; ++s) {
    for (int j = 0; j < 15; ++j) {
      sess.push_back(s);
      scores.push_back(rng.uniform());
      labels.push_back(rng.bernoulli(0.2) ? 1 : 0);
    }
  }
  labels[0] = 1;
  auto base = ranking_metrics(sess, scores, labels);

  // permute examples
  std::vector<std::size_t> perm(sess.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  rng.shuffle(perm.data(), perm.size());
  std::vector<std::int64_t> sess2;
  std::vector<double> scores2;
  std::vector<int> labels2;
  for (auto i : perm) {
    sess2.push_back(sess[i]);
    scores2.push_back(scores[i]);
    labels2.push_back(labels[i]);
  }
  auto shuffled = ranking_metrics(sess2, scores2, labels2);
  CHECK(shuffled.ndcg == doctest::Approx(base.ndcg).epsilon(1e-12));
  CHECK(shuffled.hr == base.hr);
}

TEST_CASE("logloss of a constant half is ln 2") {
  std::vector<double> scores(4, 0.5);
  std::vector<int> labels = {0, 1, 1, 0};
  CHECK(logloss(scores, labels) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("percentile threshold classifies exactly 20 of 100 distinct values") {
  std::vector<double> values(100);
  for (int i = 0; i < 100; ++i) values[i] = 0.01 * i;
  const double thr = percentile_threshold(values, 0.8);
  std::size_t above = 0;
  for (double v : values) above += v >= thr;
  CHECK(above == 20);
}

TEST_CASE("constant predictions give identical area means") {
  std::vector<int> areas = {0, 1, 2, 3, 4, 5, 2, 3};
  std::vector<StagePredictions> preds(areas.size(), {0.7, 0.7, 0.7});
  auto table = heatmap_oracle(areas, preds);
  for (const auto& cell : table.areas) {
    if (cell.count == 0) continue;
    CHECK(cell.mean_fixed == doctest::Approx(0.7));
    CHECK(cell.mean_local == doctest::Approx(0.7));
  }
  CHECK(table.low_count_warning);  // tiny buckets
}

TEST_CASE("score-mode heatmap routes forbidden triples to the overflow bucket") {
  // 10 examples; thresholds at the 80th percentile make the top-2 positive
  std::vector<double> rel(10), pref(10);
  std::vector<int> labels(10, 0);
  for (int i = 0; i < 10; ++i) {
    rel[i] = 0.1 * i;
    pref[i] = 0.1 * ((i + 5) % 10);
  }
  // the example with both top rel and top pref but label 0 contradicts
  rel[9] = 0.95;
  pref[9] = 0.95;
  pref[8] = 0.9;
  labels[0] = 1;  // low rel, low pref, clicked: also contradictory
  std::vector<StagePredictions> preds(10, {0.5, 0.5, 0.5});
  auto table = heatmap_by_scores(rel, pref, labels, preds);
  CHECK(table.score_mode);
  CHECK(table.contradictions.count >= 2);
  std::size_t total = table.contradictions.count;
  for (const auto& cell : table.areas) total += cell.count;
  CHECK(total == 10);
}

TEST_CASE("reports serialize with fixed headers") {
  MetricsReport r;
  r.auc = 0.75;
  r.logloss = 0.5;
  r.ndcg_at_10 = 0.3;
  r.hr_at_10 = 0.6;
  r.scored_examples = 10;
  r.qualifying_sessions = 2;
  const auto csv = r.to_csv();
  CHECK(csv.rfind("auc,logloss,ndcg_at_10,hr_at_10,scored_examples,"
                  "qualifying_sessions\n", 0) == 0);
  CHECK(r.to_json().find("\"auc\":0.75") != std::string::npos);

  HeatmapTable t;
  CHECK(t.to_csv().rfind("bucket,count,mean_fixed,mean_global,mean_local\n",
                         0) == 0);
}
