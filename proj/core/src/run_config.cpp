#include "drp/run_config.hpp"

#include <fstream>
#include <set>

#include "drp/error.hpp"

namespace drp {

using json = nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& section) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.contains(it.key())) {
      throw ConfigError("unknown key '" + it.key() + "' in " + section);
    }
  }
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

}  // namespace

json world_to_json(const WorldConfig& w) {
  return json{{"users", w.users},
              {"queries", w.queries},
              {"items", w.items},
              {"latent_dim", w.latent_dim},
              {"interactions", w.interactions},
              {"session_size", w.session_size},
              {"gamma", w.gamma},
              {"pi_p", w.pi_p},
              {"pi_r", w.pi_r},
              {"relevance_rate", w.relevance_rate},
              {"slope", w.slope},
              {"rp_boost", w.rp_boost},
              {"zipf_s", w.zipf_s},
              {"sens_alpha", w.sens_alpha},
              {"sens_beta", w.sens_beta},
              {"seed", w.seed}};
}

WorldConfig world_from_json(const json& j) {
  reject_unknown(j,
                 {"users", "queries", "items", "latent_dim", "interactions",
                  "session_size", "gamma", "pi_p", "pi_r", "relevance_rate",
                  "slope", "rp_boost", "zipf_s", "sens_alpha", "sens_beta", "seed"},
                 "world");
  WorldConfig w;
  get_if(j, "users", w.users);
  get_if(j, "queries", w.queries);
  get_if(j, "items", w.items);
  get_if(j, "latent_dim", w.latent_dim);
  get_if(j, "interactions", w.interactions);
  get_if(j, "session_size", w.session_size);
  get_if(j, "gamma", w.gamma);
  get_if(j, "pi_p", w.pi_p);
  get_if(j, "pi_r", w.pi_r);
  get_if(j, "relevance_rate", w.relevance_rate);
  get_if(j, "slope", w.slope);
  get_if(j, "rp_boost", w.rp_boost);
  get_if(j, "zipf_s", w.zipf_s);
  get_if(j, "sens_alpha", w.sens_alpha);
  get_if(j, "sens_beta", w.sens_beta);
  get_if(j, "seed", w.seed);
  return w;
}

json model_to_json(const ModelConfig& m) {
  return json{{"relevance", to_string(m.relevance)},
              {"preference", to_string(m.preference)},
              {"embed_dim", m.embed_dim},
              {"hidden1", m.hidden1},
              {"hidden", m.hidden},
              {"rank_d", m.rank_d},
              {"delta", m.delta},
              {"alpha_init", m.alpha_init},
              {"beta_init", m.beta_init}};
}

ModelConfig model_from_json(const json& j) {
  reject_unknown(j,
                 {"relevance", "preference", "embed_dim", "hidden1", "hidden",
                  "rank_d", "delta", "alpha_init", "beta_init"},
                 "model");
  ModelConfig m;
  if (auto it = j.find("relevance"); it != j.end()) {
    m.relevance = relevance_kind_from(it->get<std::string>());
  }
  if (auto it = j.find("preference"); it != j.end()) {
    m.preference = preference_kind_from(it->get<std::string>());
  }
  get_if(j, "embed_dim", m.embed_dim);
  get_if(j, "hidden1", m.hidden1);
  get_if(j, "hidden", m.hidden);
  get_if(j, "rank_d", m.rank_d);
  get_if(j, "delta", m.delta);
  get_if(j, "alpha_init", m.alpha_init);
  get_if(j, "beta_init", m.beta_init);
  if (m.embed_dim < 1 || m.hidden < 1 || m.hidden1 < 1 || m.rank_d < 1) {
    throw ConfigError("model dimensions must be positive");
  }
  if (m.rank_d > m.hidden) {
    throw ConfigError("model rank_d must not exceed hidden");
  }
  return m;
}

json train_to_json(const TrainConfig& t) {
  return json{{"variant", to_string(t.variant)},
              {"lr", t.lr},
              {"batch_size", t.batch_size},
              {"epochs", t.epochs},
              {"seed", t.seed},
              {"patience", t.patience}};
}

TrainConfig train_from_json(const json& j) {
  reject_unknown(j, {"variant", "lr", "batch_size", "epochs", "seed", "patience"},
                 "train");
  TrainConfig t;
  if (auto it = j.find("variant"); it != j.end()) {
    t.variant = variant_from(it->get<std::string>());
  }
  get_if(j, "lr", t.lr);
  get_if(j, "batch_size", t.batch_size);
  get_if(j, "epochs", t.epochs);
  get_if(j, "seed", t.seed);
  get_if(j, "patience", t.patience);
  if (t.lr <= 0.0 || t.batch_size < 1 || t.epochs < 1) {
    throw ConfigError("train hyper-parameters must be positive");
  }
  return t;
}

RunConfig RunConfig::from_json(const json& j) {
  reject_unknown(j, {"world", "model", "train", "eval", "paths", "ablate_seeds"},
                 "config root");
  RunConfig c;
  if (auto it = j.find("world"); it != j.end()) c.world = world_from_json(*it);
  if (auto it = j.find("model"); it != j.end()) c.model = model_from_json(*it);
  if (auto it = j.find("train"); it != j.end()) c.train = train_from_json(*it);
  if (auto it = j.find("eval"); it != j.end()) {
    reject_unknown(*it, {"cutoff", "heatmap_mode", "split"}, "eval");
    get_if(*it, "cutoff", c.eval.cutoff);
    get_if(*it, "heatmap_mode", c.eval.heatmap_mode);
    get_if(*it, "split", c.eval.split);
    if (c.eval.heatmap_mode != "oracle" && c.eval.heatmap_mode != "score") {
      throw ConfigError("eval.heatmap_mode must be 'oracle' or 'score'");
    }
    if (c.eval.split != "train" && c.eval.split != "validation" &&
        c.eval.split != "test" && c.eval.split != "all") {
      throw ConfigError("eval.split must be train|validation|test|all");
    }
  }
  if (auto it = j.find("paths"); it != j.end()) {
    reject_unknown(*it, {"dataset", "checkpoint", "reports"}, "paths");
    get_if(*it, "dataset", c.paths.dataset);
    get_if(*it, "checkpoint", c.paths.checkpoint);
    get_if(*it, "reports", c.paths.reports);
  }
  get_if(j, "ablate_seeds", c.ablate_seeds);
  return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return from_json(j);
}

json RunConfig::to_json() const {
  return json{{"world", world_to_json(world)},
              {"model", model_to_json(model)},
              {"train", train_to_json(train)},
              {"eval",
               {{"cutoff", eval.cutoff},
                {"heatmap_mode", eval.heatmap_mode},
                {"split", eval.split}}},
              {"paths",
               {{"dataset", paths.dataset},
                {"checkpoint", paths.checkpoint},
                {"reports", paths.reports}}},
              {"ablate_seeds", ablate_seeds}};
}

}  // namespace drp
