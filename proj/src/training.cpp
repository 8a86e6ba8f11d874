#include "weakmatch/training.hpp"

#include <algorithm>

#include "weakmatch/error.hpp"
#include "weakmatch/metrics.hpp"
#include "weakmatch/optim.hpp"
#include "weakmatch/rng.hpp"

namespace weakmatch {

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("train: epochs must be positive");
  if (batch_size == 0) throw ConfigError("train: batch_size must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("train: learning_rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("train: momentum must be in [0,1)");
  if (patience == 0) throw ConfigError("train: patience must be positive");
}

TrainHistory run_training(const std::vector<nn::Parameter*>& params, std::size_t n_rows,
                          const BatchLossFn& batch_loss, const ValidationSet& validation,
                          const ValidationScoreFn& score_validation, const TrainConfig& config) {
  config.validate();
  if (n_rows == 0) throw ConfigError("train: empty training set");
  nn::Sgd opt(params, {config.learning_rate, config.momentum});
  Rng rng(derive_seed(config.seed, "epoch-order"));
  TrainHistory history;
  std::vector<nn::Tensor> best;
  std::size_t since_best = 0;
  bool have_best = false;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto order = rng.permutation(n_rows);
    double loss_sum = 0.0;
    std::size_t loss_batches = 0;
    for (std::size_t lo = 0; lo < n_rows; lo += config.batch_size) {
      const std::size_t hi = std::min(n_rows, lo + config.batch_size);
      std::span<const std::size_t> rows(order.data() + lo, hi - lo);
      nn::Tape tape;
      auto loss = batch_loss(tape, rows);
      if (!loss) {
        ++history.skipped_batches;
        continue;
      }
      opt.zero_grad();
      tape.backward(*loss);
      opt.step();
      loss_sum += tape.value(*loss)[0];
      ++loss_batches;
    }
    history.steps = opt.steps();
    EpochLog log;
    log.epoch = epoch;
    log.train_loss = loss_batches ? loss_sum / static_cast<double>(loss_batches) : 0.0;
    if (validation.empty()) {
      history.epochs.push_back(log);
      history.best_epoch = epoch;
      continue;
    }
    const auto scores = score_validation();
    log.val_roc_auc = roc_auc(scores, validation.labels);
    history.epochs.push_back(log);
    if (!have_best || log.val_roc_auc > history.best_val_roc_auc) {
      have_best = true;
      history.best_epoch = epoch;
      history.best_val_roc_auc = log.val_roc_auc;
      best.clear();
      for (const auto* p : params) best.push_back(p->value);
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  if (have_best) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best[i];
  }
  return history;
}

}  // namespace weakmatch
