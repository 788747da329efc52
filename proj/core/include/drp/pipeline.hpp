#pragma once

#include <string>
#include <vector>

#include "drp/encoding.hpp"

namespace drp {

// JSONL dataset: one impression object per line with keys user_id,
// query_id, item_id, history, label, timestamp, session_id and the optional
// oracle fields oracle_p, oracle_r, sensitivity, area. Writing is canonical
// (fixed key order, shortest round-trip doubles), so identical data gives
// identical bytes.

struct LoadResult {
  std::vector<SessionExample> examples;
  FeatureSpec spec;  // vocab sizes inferred as max id + 1
  std::vector<std::string> warnings;  // lenient mode only
};

// Fail-fast parsing unless lenient is set, in which case malformed lines
// are skipped and reported in warnings (1-based line numbers everywhere).
LoadResult load_dataset(const std::string& path, bool lenient = false);

void write_dataset(const std::string& path,
                   const std::vector<SessionExample>& examples);

std::string example_to_json_line(const SessionExample& ex);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

// Session-atomic split on the 80th/90th percentiles of session start
// times; boundary ties fall toward the earlier split. Throws ConfigError
// when fewer than 3 sessions exist or a split comes out empty.
Split time_split(const std::vector<SessionExample>& examples,
                 double train_frac = 0.8, double val_frac = 0.1);

std::string split_summary_csv(const std::vector<SessionExample>& examples,
                              const Split& split);

}  // namespace drp
