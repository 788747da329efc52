#include <doctest.h>

#include <cmath>

#include "drp/error.hpp"
#include "drp/synthworld.hpp"

using namespace drp;

TEST_CASE("area table matches the taxonomy") {
  CHECK(label_area(0, 0, 0) == 0);
  CHECK(label_area(1, 0, 0) == 1);
  CHECK(label_area(1, 0, 1) == 2);
  CHECK(label_area(1, 1, 1) == 3);
  CHECK(label_area(0, 1, 1) == 4);
  CHECK(label_area(0, 1, 0) == 5);
  CHECK_THROWS_AS(label_area(0, 0, 1), ContradictionError);
  CHECK_THROWS_AS(label_area(1, 1, 0), ContradictionError);
}

TEST_CASE("degenerate rates produce only the deterministic areas") {
  WorldConfig cfg;
  cfg.users = 30;
  cfg.queries = 20;
  cfg.items = 100;
  cfg.interactions = 5000;
  cfg.gamma = 0.0;
  cfg.pi_p = 0.0;
  cfg.pi_r = 0.0;
  cfg.seed = 5;
  SynthWorld world(cfg);
  auto examples = world.generate();
  const auto& s = world.summary();
  CHECK(s.area_counts[2] == 0);
  CHECK(s.area_counts[4] == 0);
  CHECK(s.area_counts[0] + s.area_counts[1] + s.area_counts[3] +
            s.area_counts[5] ==
        examples.size());
}

TEST_CASE("positive preference and relevance always click") {
  WorldConfig cfg;
  cfg.users = 20;
  cfg.queries = 10;
  cfg.items = 50;
  cfg.interactions = 3000;
  cfg.seed = 6;
  SynthWorld world(cfg);
  for (const auto& ex : world.generate()) {
    if (*ex.oracle_p == 1 && *ex.oracle_r == 1) CHECK(ex.label == 1);
    if (*ex.oracle_p == 0 && *ex.oracle_r == 0) CHECK(ex.label == 0);
    // forbidden triples never occur
    CHECK_NOTHROW(label_area(*ex.oracle_p, *ex.oracle_r, ex.label));
    CHECK(*ex.area == label_area(*ex.oracle_p, *ex.oracle_r, ex.label));
  }
}

TEST_CASE("preference-only positive rate concentrates at pi_p") {
  WorldConfig cfg;
  cfg.users = 200;
  cfg.queries = 100;
  cfg.items = 2000;
  cfg.interactions = 100000;
  cfg.gamma = 0.0;
  cfg.pi_p = 0.3;
  cfg.seed = 7;
  SynthWorld world(cfg);
  auto examples = world.generate();
  std::size_t p_only = 0, area2 = 0;
  for (const auto& ex : examples) {
    if (*ex.oracle_p == 1 && *ex.oracle_r == 0) {
      ++p_only;
      area2 += *ex.area == 2;
    }
  }
  REQUIRE(p_only > 1000);
  const double rate = double(area2) / double(p_only);
  CHECK(rate == doctest::Approx(0.3).epsilon(0.034));  // 0.3 +/- 0.01
}

TEST_CASE("relevance-only positive rate tracks pi_r times sensitivity") {
  WorldConfig cfg;
  cfg.users = 200;
  cfg.queries = 100;
  cfg.items = 2000;
  cfg.interactions = 100000;
  cfg.gamma = 0.0;
  cfg.pi_r = 0.6;
  cfg.seed = 8;
  SynthWorld world(cfg);
  auto examples = world.generate();
  std::size_t r_only = 0, area4 = 0;
  double sens = 0.0;
  for (const auto& ex : examples) {
    if (*ex.oracle_p == 0 && *ex.oracle_r == 1) {
      ++r_only;
      area4 += *ex.area == 4;
      sens += *ex.sensitivity;
    }
  }
  REQUIRE(r_only > 1000);
  const double rate = double(area4) / double(r_only);
  const double expected = cfg.pi_r * sens / double(r_only);
  CHECK(std::abs(rate - expected) < 0.01);
}

TEST_CASE("marginal relevance rate is calibrated") {
  WorldConfig cfg;
  cfg.users = 100;
  cfg.queries = 200;
  cfg.items = 2000;
  cfg.interactions = 50000;
  cfg.gamma = 0.0;
  cfg.relevance_rate = 0.25;
  cfg.seed = 9;
  SynthWorld world(cfg);
  auto examples = world.generate();
  double r = 0.0;
  for (const auto& ex : examples) r += *ex.oracle_r;
  CHECK(r / double(examples.size()) == doctest::Approx(0.25).epsilon(0.08));
}

TEST_CASE("entanglement switches with gamma") {
  WorldConfig cfg;
  cfg.users = 300;
  cfg.queries = 150;
  cfg.items = 3000;
  cfg.interactions = 100000;
  cfg.seed = 10;

  cfg.gamma = 0.0;
  SynthWorld independent(cfg);
  independent.generate();
  CHECK(std::abs(independent.summary().pr_correlation) < 0.02);

  cfg.gamma = 0.5;
  SynthWorld entangled(cfg);
  entangled.generate();
  CHECK(entangled.summary().pr_correlation > 0.02);
}

TEST_CASE("generation is deterministic per seed") {
  WorldConfig cfg;
  cfg.users = 40;
  cfg.queries = 20;
  cfg.items = 200;
  cfg.interactions = 2000;
  cfg.seed = 11;
  SynthWorld w1(cfg), w2(cfg);
  auto a = w1.generate();
  auto b = w2.generate();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].user_id == b[i].user_id);
    CHECK(a[i].item_id == b[i].item_id);
    CHECK(a[i].label == b[i].label);
    CHECK(*a[i].sensitivity == *b[i].sensitivity);
  }
  cfg.seed = 12;
  SynthWorld w3(cfg);
  auto c = w3.generate();
  bool differs = false;
  for (std::size_t i = 0; i < std::min(a.size(), c.size()); ++i) {
    differs |= a[i].item_id != c[i].item_id || a[i].label != c[i].label;
  }
  CHECK(differs);
}

TEST_CASE("timestamps strictly increase and histories grow with clicks") {
  WorldConfig cfg;
  cfg.users = 10;
  cfg.queries = 10;
  cfg.items = 100;
  cfg.interactions = 1000;
  cfg.seed = 13;
  SynthWorld world(cfg);
  auto examples = world.generate();
  for (std::size_t i = 1; i < examples.size(); ++i) {
    CHECK(examples[i].timestamp > examples[i - 1].timestamp);
  }
  // the history of any example contains exactly the user's prior clicks
  std::vector<std::vector<std::int64_t>> clicks(cfg.users);
  for (const auto& ex : examples) {
    CHECK(ex.history == clicks[std::size_t(ex.user_id)]);
    if (ex.label) clicks[std::size_t(ex.user_id)].push_back(ex.item_id);
  }
}

TEST_CASE("invalid configs are rejected") {
  WorldConfig cfg;
  cfg.users = 0;
  CHECK_THROWS_AS(SynthWorld{cfg}, GenerationError);
  cfg.users = 2;
  cfg.gamma = 1.5;
  CHECK_THROWS_AS(SynthWorld{cfg}, GenerationError);
}
