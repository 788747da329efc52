#include "drp/encoding.hpp"

#include "drp/error.hpp"

namespace drp {

namespace {
void check_id(std::int64_t id, std::size_t vocab, const char* field) {
  if (id < 0 || std::size_t(id) >= vocab) {
    throw VocabularyError(std::string(field) + " id " + std::to_string(id) +
                          " outside vocabulary of size " +
                          std::to_string(vocab));
  }
}
}  // namespace

Encoder::Encoder(const FeatureSpec& spec, Rng& rng)
    : spec_(spec),
      user_table_("enc.user_table", spec.user_vocab, spec.embed_dim, rng),
      query_table_("enc.query_table", spec.query_vocab, spec.embed_dim, rng),
      item_table_("enc.item_table", spec.item_vocab, spec.embed_dim, rng),
      user_proj_("enc.user_proj", spec.embed_dim, 2 * spec.embed_dim, rng) {
  if (spec.user_vocab < 1 || spec.query_vocab < 1 || spec.item_vocab < 1 ||
      spec.embed_dim < 1) {
    throw ConfigError("feature spec requires vocab sizes and embed dim >= 1");
  }
}

EncodedTriple Encoder::encode(const SessionExample& ex, Cache& c) const {
  check_id(ex.user_id, spec_.user_vocab, "user");
  check_id(ex.query_id, spec_.query_vocab, "query");
  check_id(ex.item_id, spec_.item_vocab, "item");

  const std::size_t d = spec_.embed_dim;
  c.user_id = ex.user_id;
  c.query_id = ex.query_id;
  c.item_id = ex.item_id;

  // Most recent kMaxHistory clicks; empty history pools to the zero vector.
  c.hist_used.clear();
  const std::size_t n = ex.history.size();
  const std::size_t start = n > kMaxHistory ? n - kMaxHistory : 0;
  for (std::size_t i = start; i < n; ++i) {
    check_id(ex.history[i], spec_.item_vocab, "history item");
    c.hist_used.push_back(ex.history[i]);
  }

  c.hist_mean.assign(d, 0.0);
  if (!c.hist_used.empty()) {
    for (auto id : c.hist_used) {
      axpy(1.0, item_table_.row(std::size_t(id)), c.hist_mean);
    }
    const double inv = 1.0 / double(c.hist_used.size());
    for (auto& x : c.hist_mean) x *= inv;
  }

  c.concat.resize(2 * d);
  auto user_row = user_table_.row(std::size_t(ex.user_id));
  for (std::size_t i = 0; i < d; ++i) c.concat[i] = user_row[i];
  for (std::size_t i = 0; i < d; ++i) c.concat[d + i] = c.hist_mean[i];

  EncodedTriple t;
  t.q = query_table_.row(std::size_t(ex.query_id));
  t.v = item_table_.row(std::size_t(ex.item_id));
  t.u = user_proj_.forward(c.concat, c.proj);
  return t;
}

void Encoder::backward(std::span<const double> dq, std::span<const double> dv,
                       std::span<const double> du, Cache& c) {
  const std::size_t d = spec_.embed_dim;
  query_table_.accumulate_grad(std::size_t(c.query_id), dq);
  item_table_.accumulate_grad(std::size_t(c.item_id), dv);

  auto dconcat = user_proj_.backward(du, c.proj);
  user_table_.accumulate_grad(std::size_t(c.user_id), dconcat.subspan(0, d));
  if (!c.hist_used.empty()) {
    const double inv = 1.0 / double(c.hist_used.size());
    for (auto id : c.hist_used) {
      item_table_.accumulate_grad(std::size_t(id), dconcat.subspan(d, d), inv);
    }
  }
}

}  // namespace drp
