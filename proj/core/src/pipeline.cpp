#include "drp/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "drp/error.hpp"

namespace drp {

using json = nlohmann::json;

namespace {

std::int64_t require_int(const json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw SchemaError("line " + std::to_string(line) + ": missing key '" +
                      key + "'");
  }
  if (!it->is_number_integer()) {
    throw SchemaError("line " + std::to_string(line) + ": key '" + key +
                      "' is not an integer");
  }
  return it->get<std::int64_t>();
}

SessionExample parse_example(const json& j, std::size_t line) {
  SessionExample ex;
  ex.user_id = require_int(j, "user_id", line);
  ex.query_id = require_int(j, "query_id", line);
  ex.item_id = require_int(j, "item_id", line);
  ex.label = int(require_int(j, "label", line));
  ex.timestamp = require_int(j, "timestamp", line);
  ex.session_id = require_int(j, "session_id", line);
  if (ex.user_id < 0 || ex.query_id < 0 || ex.item_id < 0) {
    throw SchemaError("line " + std::to_string(line) + ": negative id");
  }
  if (ex.label != 0 && ex.label != 1) {
    throw SchemaError("line " + std::to_string(line) + ": label must be 0 or 1");
  }
  auto hist = j.find("history");
  if (hist == j.end() || !hist->is_array()) {
    throw SchemaError("line " + std::to_string(line) +
                      ": missing or non-array 'history'");
  }
  for (const auto& h : *hist) {
    if (!h.is_number_integer() || h.get<std::int64_t>() < 0) {
      throw SchemaError("line " + std::to_string(line) +
                        ": history entries must be non-negative integers");
    }
    ex.history.push_back(h.get<std::int64_t>());
  }
  if (auto it = j.find("oracle_p"); it != j.end()) ex.oracle_p = it->get<int>();
  if (auto it = j.find("oracle_r"); it != j.end()) ex.oracle_r = it->get<int>();
  if (auto it = j.find("sensitivity"); it != j.end()) {
    ex.sensitivity = it->get<double>();
  }
  if (auto it = j.find("area"); it != j.end()) ex.area = it->get<int>();
  return ex;
}

}  // namespace

LoadResult load_dataset(const std::string& path, bool lenient) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset file '" + path + "'");

  LoadResult result;
  std::int64_t max_user = -1, max_query = -1, max_item = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      if (!j.is_object()) {
        throw SchemaError("line " + std::to_string(line_no) +
                          ": not a JSON object");
      }
      auto ex = parse_example(j, line_no);
      max_user = std::max(max_user, ex.user_id);
      max_query = std::max(max_query, ex.query_id);
      max_item = std::max(max_item, ex.item_id);
      for (auto h : ex.history) max_item = std::max(max_item, h);
      result.examples.push_back(std::move(ex));
    } catch (const json::parse_error& e) {
      if (!lenient) {
        throw ParseError("line " + std::to_string(line_no) +
                             ": malformed JSON: " + e.what(),
                         line_no);
      }
      result.warnings.push_back("line " + std::to_string(line_no) +
                                ": skipped (malformed JSON)");
    } catch (const SchemaError& e) {
      if (!lenient) throw;
      result.warnings.push_back(std::string("skipped: ") + e.what());
    }
  }

  result.spec.user_vocab = std::size_t(max_user + 1);
  result.spec.query_vocab = std::size_t(max_query + 1);
  result.spec.item_vocab = std::size_t(max_item + 1);
  return result;
}

std::string example_to_json_line(const SessionExample& ex) {
  // Canonical key order, written by hand so bytes stay stable.
  std::ostringstream os;
  os << "{\"user_id\":" << ex.user_id << ",\"query_id\":" << ex.query_id
     << ",\"item_id\":" << ex.item_id << ",\"history\":[";
  for (std::size_t i = 0; i < ex.history.size(); ++i) {
    if (i) os << ',';
    os << ex.history[i];
  }
  os << "],\"label\":" << ex.label << ",\"timestamp\":" << ex.timestamp
     << ",\"session_id\":" << ex.session_id;
  if (ex.oracle_p) os << ",\"oracle_p\":" << *ex.oracle_p;
  if (ex.oracle_r) os << ",\"oracle_r\":" << *ex.oracle_r;
  if (ex.sensitivity) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", *ex.sensitivity);
    os << ",\"sensitivity\":" << buf;
  }
  if (ex.area) os << ",\"area\":" << *ex.area;
  os << '}';
  return os.str();
}

void write_dataset(const std::string& path,
                   const std::vector<SessionExample>& examples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write dataset file '" + path + "'");
  for (const auto& ex : examples) {
    out << example_to_json_line(ex) << '\n';
  }
}

Split time_split(const std::vector<SessionExample>& examples,
                 double train_frac, double val_frac) {
  // First timestamp per session.
  std::map<std::int64_t, std::int64_t> session_start;
  for (const auto& ex : examples) {
    auto [it, inserted] = session_start.try_emplace(ex.session_id, ex.timestamp);
    if (!inserted && ex.timestamp < it->second) it->second = ex.timestamp;
  }
  if (session_start.size() < 3) {
    throw ConfigError("time split requires at least 3 sessions, got " +
                      std::to_string(session_start.size()));
  }

  std::vector<std::int64_t> starts;
  starts.reserve(session_start.size());
  for (const auto& [sid, t] : session_start) starts.push_back(t);
  std::sort(starts.begin(), starts.end());

  // Nearest-rank percentiles; a session goes to the earliest split whose
  // boundary time it does not exceed.
  auto rank_value = [&](double frac) {
    std::size_t rank = std::size_t(std::ceil(frac * double(starts.size())));
    if (rank == 0) rank = 1;
    if (rank > starts.size()) rank = starts.size();
    return starts[rank - 1];
  };
  const std::int64_t t_train = rank_value(train_frac);
  const std::int64_t t_val = rank_value(train_frac + val_frac);

  Split split;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const std::int64_t start = session_start.at(examples[i].session_id);
    if (start <= t_train) {
      split.train.push_back(i);
    } else if (start <= t_val) {
      split.validation.push_back(i);
    } else {
      split.test.push_back(i);
    }
  }
  if (split.train.empty() || split.validation.empty() || split.test.empty()) {
    throw ConfigError("degenerate time split: a partition is empty");
  }
  return split;
}

std::string split_summary_csv(const std::vector<SessionExample>& examples,
                              const Split& split) {
  std::ostringstream os;
  os << "split,examples,sessions,positives,min_timestamp,max_timestamp\n";
  auto row = [&](const char* name, const std::vector<std::size_t>& idx) {
    std::map<std::int64_t, int> sessions;
    std::size_t positives = 0;
    std::int64_t lo = 0, hi = 0;
    bool first = true;
    for (auto i : idx) {
      const auto& ex = examples[i];
      sessions[ex.session_id] = 1;
      positives += ex.label;
      if (first || ex.timestamp < lo) lo = ex.timestamp;
      if (first || ex.timestamp > hi) hi = ex.timestamp;
      first = false;
    }
    os << name << ',' << idx.size() << ',' << sessions.size() << ','
       << positives << ',' << lo << ',' << hi << '\n';
  };
  row("train", split.train);
  row("validation", split.validation);
  row("test", split.test);
  return os.str();
}

}  // namespace drp
