#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "drp/nn.hpp"

namespace drp {

struct FeatureSpec {
  std::size_t user_vocab = 0;
  std::size_t query_vocab = 0;
  std::size_t item_vocab = 0;
  std::size_t embed_dim = 64;
};

// One logged impression. Oracle fields are present only for synthetic data.
struct SessionExample {
  std::int64_t user_id = 0;
  std::int64_t query_id = 0;
  std::int64_t item_id = 0;
  std::vector<std::int64_t> history;  // previously clicked items, oldest first
  int label = 0;
  std::int64_t timestamp = 0;
  std::int64_t session_id = 0;

  std::optional<int> oracle_p;
  std::optional<int> oracle_r;
  std::optional<double> sensitivity;
  std::optional<int> area;
};

struct EncodedTriple {
  std::span<const double> q;
  std::span<const double> v;
  std::span<const double> u;
};

// ID features to the dense (q, v, u) triple. The user vector combines the
// user-id embedding with a mean pool over the clicked-item history (most
// recent kMaxHistory items) through one affine layer.
class Encoder {
 public:
  static constexpr std::size_t kMaxHistory = 50;

  struct Cache {
    std::vector<double> hist_mean;
    std::vector<double> concat;
    std::vector<std::int64_t> hist_used;
    Affine::Cache proj;
    std::int64_t user_id = 0;
    std::int64_t query_id = 0;
    std::int64_t item_id = 0;
  };

  Encoder() = default;
  Encoder(const FeatureSpec& spec, Rng& rng);

  EncodedTriple encode(const SessionExample& ex, Cache& c) const;
  void backward(std::span<const double> dq, std::span<const double> dv,
                std::span<const double> du, Cache& c);

  const FeatureSpec& spec() const { return spec_; }
  void collect(std::vector<ParamBlock*>& out) {
    user_table_.collect(out);
    query_table_.collect(out);
    item_table_.collect(out);
    user_proj_.collect(out);
  }

  Embedding& user_table() { return user_table_; }
  Embedding& query_table() { return query_table_; }
  Embedding& item_table() { return item_table_; }
  Affine& user_proj() { return user_proj_; }

 private:
  FeatureSpec spec_;
  Embedding user_table_;
  Embedding query_table_;
  Embedding item_table_;
  Affine user_proj_;  // 2*dim -> dim
};

}  // namespace drp
