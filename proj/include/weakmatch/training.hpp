#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "weakmatch/featurize.hpp"
#include "weakmatch/tensor.hpp"

namespace weakmatch {

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 64;
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::size_t patience = 3;  // epochs without validation improvement before stopping
  std::uint64_t seed = 1;

  void validate() const;
};

/// Labeled pairs with main-task binary labels, used for model selection.
struct ValidationSet {
  std::span<const EncodedPair> pairs;
  std::vector<int> labels;

  bool empty() const { return pairs.empty(); }
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_roc_auc = 0.0;
};

struct TrainHistory {
  std::vector<EpochLog> epochs;
  std::size_t best_epoch = 0;
  double best_val_roc_auc = 0.0;
  std::uint64_t steps = 0;
  std::uint64_t skipped_batches = 0;
};

/// Builds the loss of one minibatch given its row indices, or returns
/// nullopt when the batch carries no training signal (the step is skipped).
using BatchLossFn =
    std::function<std::optional<nn::Var>(nn::Tape&, std::span<const std::size_t> rows)>;
/// Scores the validation pairs with the current parameters.
using ValidationScoreFn = std::function<std::vector<double>()>;

/// Minibatch SGD over `n_rows` rows reshuffled every epoch. After each epoch
/// the validation ROC AUC is computed; training stops after `patience`
/// epochs without improvement and the parameters of the best epoch are
/// restored. With an empty validation set every epoch runs and the last
/// parameters are kept.
TrainHistory run_training(const std::vector<nn::Parameter*>& params, std::size_t n_rows,
                          const BatchLossFn& batch_loss, const ValidationSet& validation,
                          const ValidationScoreFn& score_validation, const TrainConfig& config);

}  // namespace weakmatch
