#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "drp/model.hpp"

namespace drp {

struct TrainConfig {
  Variant variant = Variant::FULL;
  double lr = 1e-3;
  std::size_t batch_size = 256;
  std::size_t epochs = 5;
  std::uint64_t seed = 1;
  std::size_t patience = 2;  // early stop on validation AUC
};

// Minimized negative binary cross entropy; y_hat must be interior.
double bce_loss(double y_hat, int y);
double bce_grad(double y_hat, int y);

// Standard Adam (beta1 0.9, beta2 0.999, eps 1e-8, bias correction), dense
// over every coordinate of the registered blocks.
class AdamOptimizer {
 public:
  AdamOptimizer(std::vector<ParamBlock*> params, double lr);

  // One update from the accumulated gradients. Does not zero them.
  void step();
  std::size_t steps_taken() const { return t_; }
  double lr() const { return lr_; }

 private:
  std::vector<ParamBlock*> params_;
  std::vector<Tensor> m_, v_;
  double lr_;
  std::size_t t_ = 0;
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_auc = 0.0;
  bool improved = false;
};

struct TrainResult {
  std::vector<EpochStats> history;
  double best_val_auc = 0.0;
  std::size_t best_epoch = 0;
  std::size_t retract_calls = 0;
  std::size_t steps = 0;
};

class Trainer {
 public:
  Trainer(Model& model, const TrainConfig& cfg);

  // Epoch-shuffled minibatch training with early stopping on validation
  // AUC; the model is left holding the best-epoch parameters.
  TrainResult train(const std::vector<SessionExample>& examples,
                    const std::vector<std::size_t>& train_idx,
                    const std::vector<std::size_t>& val_idx);

  // Mean loss over one batch; accumulates gradients (does not step).
  double batch_gradients(const std::vector<SessionExample>& examples,
                         const std::vector<std::size_t>& batch);

  // Gradient accumulation + Adam step (+ retraction unless V1).
  double train_step(const std::vector<SessionExample>& examples,
                    const std::vector<std::size_t>& batch);

  AdamOptimizer& optimizer() { return opt_; }
  std::size_t retract_calls() const { return retract_calls_; }

 private:
  Model& model_;
  TrainConfig cfg_;
  AdamOptimizer opt_;
  Model::Workspace ws_;
  std::size_t retract_calls_ = 0;
};

// Final scores for every listed example under the given variant.
std::vector<double> score_examples(Model& model, Variant v,
                                   const std::vector<SessionExample>& examples,
                                   const std::vector<std::size_t>& idx);

// Per-stage scores, for the heatmap protocol.
std::vector<StageScores> stage_scores(
    Model& model, Variant v, const std::vector<SessionExample>& examples,
    const std::vector<std::size_t>& idx);

}  // namespace drp
