#pragma once

#include <string>

#include <json.hpp>

#include "drp/model.hpp"
#include "drp/synthworld.hpp"
#include "drp/training.hpp"

namespace drp {

struct EvalConfig {
  std::size_t cutoff = 10;
  std::string heatmap_mode = "oracle";  // oracle | score
  std::string split = "test";           // train | validation | test | all
};

struct PathsConfig {
  std::string dataset = "dataset.jsonl";
  std::string checkpoint = "checkpoint.json";
  std::string reports = "reports";
};

// Top level configuration document with sections world, model, train, eval
// and paths. Unknown keys anywhere are rejected; defaults are materialized
// so the echoed effective config is complete.
struct RunConfig {
  WorldConfig world;
  ModelConfig model;
  TrainConfig train;
  EvalConfig eval;
  PathsConfig paths;
  std::size_t ablate_seeds = 5;

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig from_file(const std::string& path);
  nlohmann::json to_json() const;
};

nlohmann::json world_to_json(const WorldConfig& w);
WorldConfig world_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const ModelConfig& m);
ModelConfig model_from_json(const nlohmann::json& j);
nlohmann::json train_to_json(const TrainConfig& t);
TrainConfig train_from_json(const nlohmann::json& j);

}  // namespace drp
