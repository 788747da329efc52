#pragma once

#include <string>
#include <vector>

#include "drp/model.hpp"
#include "drp/training.hpp"

namespace drp {

// Self-describing JSON checkpoint: version, feature spec, model and train
// configuration, training history and every parameter block with its shape
// and values. Doubles round-trip bit-exactly.
struct Checkpoint {
  static constexpr int kVersion = 1;

  FeatureSpec spec;
  ModelConfig model;
  TrainConfig train;
  std::size_t epochs_trained = 0;
  std::vector<double> val_auc_history;

  struct Entry {
    std::string name;
    Tensor value;
  };
  std::vector<Entry> params;

  static Checkpoint capture(Model& model, const TrainConfig& train_cfg,
                            const TrainResult& result);
  void apply(Model& model) const;  // by-name restore, shape-checked

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

  // Rebuild a model from the stored spec/config and restore parameters.
  Model restore() const;
};

}  // namespace drp
