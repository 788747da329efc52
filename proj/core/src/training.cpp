#include "drp/training.hpp"

#include <algorithm>
#include <cmath>

#include "drp/error.hpp"
#include "drp/metrics.hpp"
#include "drp/rng.hpp"

namespace drp {

double bce_loss(double y_hat, int y) {
  return y ? -std::log(y_hat) : -std::log(1.0 - y_hat);
}

double bce_grad(double y_hat, int y) {
  return (y_hat - double(y)) / (y_hat * (1.0 - y_hat));
}

AdamOptimizer::AdamOptimizer(std::vector<ParamBlock*> params, double lr)
    : params_(std::move(params)), lr_(lr) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (auto* p : params_) {
    m_.emplace_back(Tensor::zeros(p->value.shape()));
    v_.emplace_back(Tensor::zeros(p->value.shape()));
  }
}

void AdamOptimizer::step() {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  ++t_;
  const double bc1 = 1.0 - std::pow(kBeta1, double(t_));
  const double bc2 = 1.0 - std::pow(kBeta2, double(t_));
  for (std::size_t b = 0; b < params_.size(); ++b) {
    auto& p = *params_[b];
    auto& m = m_[b];
    auto& v = v_[b];
    const std::size_t n = p.value.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double g = p.grad[i];
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g;
      v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p.value[i] -= lr_ * mhat / (std::sqrt(vhat) + kEps);
    }
  }
}

Trainer::Trainer(Model& model, const TrainConfig& cfg)
    : model_(model), cfg_(cfg), opt_(model.trainable(cfg.variant), cfg.lr) {}

double Trainer::batch_gradients(const std::vector<SessionExample>& examples,
                                const std::vector<std::size_t>& batch) {
  const double inv = 1.0 / double(batch.size());
  double loss = 0.0;
  for (auto idx : batch) {
    const auto& ex = examples[idx];
    const auto s = model_.forward(ex, cfg_.variant, ws_);
    loss += bce_loss(s.final_score, ex.label);
    model_.backward(inv * bce_grad(s.final_score, ex.label), cfg_.variant, ws_);
  }
  return loss * inv;
}

double Trainer::train_step(const std::vector<SessionExample>& examples,
                           const std::vector<std::size_t>& batch) {
  for (auto* p : model_.trainable(cfg_.variant)) p->zero_grad();
  const double loss = batch_gradients(examples, batch);
  if (!std::isfinite(loss)) {
    throw TrainingError("loss diverged at step " +
                            std::to_string(opt_.steps_taken() + 1),
                        opt_.steps_taken() + 1);
  }
  opt_.step();
  if (cfg_.variant != Variant::V1_NON_ORTHO) {
    model_.retract();
    ++retract_calls_;
  }
  return loss;
}

TrainResult Trainer::train(const std::vector<SessionExample>& examples,
                           const std::vector<std::size_t>& train_idx,
                           const std::vector<std::size_t>& val_idx) {
  if (train_idx.empty() || val_idx.empty()) {
    throw ConfigError("training requires non-empty train and validation splits");
  }

  std::vector<int> val_labels;
  val_labels.reserve(val_idx.size());
  for (auto i : val_idx) val_labels.push_back(examples[i].label);

  TrainResult result;
  Rng shuffle_rng(hash_mix(cfg_.seed, 0x7265ULL));
  std::vector<std::size_t> order(train_idx);
  std::vector<std::size_t> batch;

  // Parameter snapshot of the best validation epoch.
  auto blocks = model_.params();
  std::vector<Tensor> best;
  auto snapshot = [&] {
    best.clear();
    for (auto* p : blocks) best.push_back(p->value);
  };
  auto restore = [&] {
    for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i]->value = best[i];
  };
  snapshot();

  std::size_t since_best = 0;
  result.best_val_auc = -1.0;
  for (std::size_t epoch = 0; epoch < cfg_.epochs; ++epoch) {
    shuffle_rng.shuffle(order.data(), order.size());
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t pos = 0; pos < order.size(); pos += cfg_.batch_size) {
      const std::size_t end = std::min(pos + cfg_.batch_size, order.size());
      batch.assign(order.begin() + pos, order.begin() + end);
      epoch_loss += train_step(examples, batch);
      ++batches;
    }

    const auto val_scores =
        score_examples(model_, cfg_.variant, examples, val_idx);
    const double val_auc = auc(val_scores, val_labels);

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = epoch_loss / double(batches);
    stats.val_auc = val_auc;
    stats.improved = val_auc > result.best_val_auc;
    if (stats.improved) {
      result.best_val_auc = val_auc;
      result.best_epoch = epoch;
      snapshot();
      since_best = 0;
    } else if (++since_best >= cfg_.patience) {
      result.history.push_back(stats);
      break;
    }
    result.history.push_back(stats);
  }

  restore();
  result.retract_calls = retract_calls_;
  result.steps = opt_.steps_taken();
  return result;
}

std::vector<double> score_examples(Model& model, Variant v,
                                   const std::vector<SessionExample>& examples,
                                   const std::vector<std::size_t>& idx) {
  Model::Workspace ws;
  std::vector<double> out;
  out.reserve(idx.size());
  for (auto i : idx) {
    out.push_back(model.forward(examples[i], v, ws).final_score);
  }
  return out;
}

std::vector<StageScores> stage_scores(
    Model& model, Variant v, const std::vector<SessionExample>& examples,
    const std::vector<std::size_t>& idx) {
  Model::Workspace ws;
  std::vector<StageScores> out;
  out.reserve(idx.size());
  for (auto i : idx) {
    out.push_back(model.forward(examples[i], v, ws));
  }
  return out;
}

}  // namespace drp
