#include "drp/checkpoint.hpp"

#include <fstream>
#include <map>

#include <json.hpp>

#include "drp/error.hpp"
#include "drp/run_config.hpp"

namespace drp {

using json = nlohmann::json;

Checkpoint Checkpoint::capture(Model& model, const TrainConfig& train_cfg,
                               const TrainResult& result) {
  Checkpoint ck;
  ck.spec = model.feature_spec();
  ck.model = model.config();
  ck.train = train_cfg;
  ck.epochs_trained = result.history.size();
  for (const auto& h : result.history) ck.val_auc_history.push_back(h.val_auc);
  for (auto* p : model.params()) {
    ck.params.push_back({p->name, p->value});
  }
  return ck;
}

void Checkpoint::apply(Model& model) const {
  std::map<std::string, const Tensor*> by_name;
  for (const auto& e : params) by_name[e.name] = &e.value;
  for (auto* p : model.params()) {
    auto it = by_name.find(p->name);
    if (it == by_name.end()) {
      throw ConfigError("checkpoint missing parameter '" + p->name + "'");
    }
    if (it->second->shape() != p->value.shape()) {
      throw DimensionError("checkpoint parameter '" + p->name + "' has shape " +
                           it->second->shape_str() + ", model expects " +
                           p->value.shape_str());
    }
    p->value = *it->second;
  }
}

void Checkpoint::save(const std::string& path) const {
  json j;
  j["version"] = kVersion;
  j["feature_spec"] = {{"user_vocab", spec.user_vocab},
                       {"query_vocab", spec.query_vocab},
                       {"item_vocab", spec.item_vocab},
                       {"embed_dim", spec.embed_dim}};
  j["model"] = model_to_json(model);
  j["train"] = train_to_json(train);
  j["epochs_trained"] = epochs_trained;
  j["val_auc_history"] = val_auc_history;
  json jp = json::array();
  for (const auto& e : params) {
    jp.push_back({{"name", e.name},
                  {"shape", e.value.shape()},
                  {"data", std::vector<double>(e.value.view().begin(),
                                               e.value.view().end())}});
  }
  j["params"] = std::move(jp);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write checkpoint '" + path + "'");
  out << j.dump() << '\n';
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("checkpoint '" + path + "' is not valid JSON: " +
                      e.what());
  }
  if (!j.contains("version")) {
    throw SchemaError("checkpoint missing version field");
  }
  if (j["version"].get<int>() != kVersion) {
    throw SchemaError("unsupported checkpoint version " +
                      j["version"].dump());
  }

  Checkpoint ck;
  const auto& fs = j.at("feature_spec");
  ck.spec.user_vocab = fs.at("user_vocab").get<std::size_t>();
  ck.spec.query_vocab = fs.at("query_vocab").get<std::size_t>();
  ck.spec.item_vocab = fs.at("item_vocab").get<std::size_t>();
  ck.spec.embed_dim = fs.at("embed_dim").get<std::size_t>();
  ck.model = model_from_json(j.at("model"));
  ck.train = train_from_json(j.at("train"));
  ck.epochs_trained = j.at("epochs_trained").get<std::size_t>();
  ck.val_auc_history = j.at("val_auc_history").get<std::vector<double>>();
  for (const auto& e : j.at("params")) {
    Checkpoint::Entry entry;
    entry.name = e.at("name").get<std::string>();
    entry.value = Tensor(e.at("shape").get<std::vector<std::size_t>>(),
                         e.at("data").get<std::vector<double>>());
    if (!entry.value.all_finite()) {
      throw SchemaError("checkpoint parameter '" + entry.name +
                        "' contains non-finite values");
    }
    ck.params.push_back(std::move(entry));
  }
  return ck;
}

Model Checkpoint::restore() const {
  Model m(spec, model, /*seed=*/0);
  apply(m);
  return m;
}

}  // namespace drp
