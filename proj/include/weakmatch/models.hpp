#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "json.hpp"
#include "weakmatch/checkpoint.hpp"
#include "weakmatch/featurize.hpp"
#include "weakmatch/layers.hpp"
#include "weakmatch/tasks.hpp"

namespace weakmatch {

enum class Side { query, ad };

/// Query word sequence; an empty query becomes one padding word.
nn::WordBatch query_words(std::span<const FieldSequences* const> batch);
/// keyword, separator, ad title, separator, LP title. Separators are empty
/// (all-zero) words.
nn::WordBatch ad_words(std::span<const FieldSequences* const> batch);

struct CdssmConfig {
  std::size_t conv_channels = 128;
  std::size_t semantic_dim = 64;
};

/// Two-tower convolutional matching model. Each tower: word-window
/// convolution over trigram counts, tanh, max-pool over words, dense
/// semantic layer, tanh, L2 normalization. Towers do not share weights.
class CdssmModel {
 public:
  CdssmModel(std::size_t vocab_size, CdssmConfig config, std::uint64_t seed);

  /// Unit-norm [B, semantic_dim] encodings.
  nn::Var encode(nn::Tape& t, Side side, nn::WordBatch words);
  /// (cosine + 1) / 2 as [B,1].
  nn::Var score(nn::Tape& t, nn::WordBatch query, nn::WordBatch ad);

  /// Batched inference helpers.
  std::vector<double> score_pairs(std::span<const EncodedPair> pairs, std::size_t batch = 256);
  nn::Tensor encode_fields(Side side, std::span<const FieldSequences* const> fields,
                           std::size_t batch = 256);

  std::vector<nn::Parameter*> parameters();
  std::size_t vocab_size() const { return vocab_size_; }
  const CdssmConfig& config() const { return config_; }

  nlohmann::json descriptor() const;
  nn::Checkpoint to_checkpoint() const;
  static CdssmModel from_checkpoint(const nn::Checkpoint& ckpt);
  /// Hash over descriptor and parameter bits.
  std::uint64_t fingerprint() const;

 private:
  struct Tower {
    nn::WordConv conv;
    nn::Dense semantic;
  };
  Tower& tower(Side side) { return side == Side::query ? query_tower_ : ad_tower_; }

  std::size_t vocab_size_;
  CdssmConfig config_;
  Tower query_tower_;
  Tower ad_tower_;
};

inline constexpr double kScoreScale = 0.5;
inline constexpr double kScoreShift = 0.5;

/// Cosine-to-score map shared by pair scoring and retrieval, clamped to [0,1]
/// against rounding.
inline double cosine_to_score(double c) {
  return std::clamp(c * kScoreScale + kScoreShift, 0.0, 1.0);
}

struct DeepCrossingConfig {
  std::size_t embedding_dim = 64;
  std::size_t residual_units = 2;
  bool batchnorm = true;
};

/// Annotator network: one trigram embedding layer applied to the summed
/// trigram counts of each field, relu, concatenation of the four field
/// embeddings, residual units (relu after each), and one sigmoid head per task.
class DeepCrossingModel {
 public:
  DeepCrossingModel(std::size_t vocab_size, DeepCrossingConfig config, TaskSet tasks,
                    std::uint64_t seed);

  /// Per-task probabilities [B, T].
  nn::Var forward(nn::Tape& t, std::span<const EncodedPair* const> batch, bool training);

  /// Per-task probabilities and composite scores, eval mode.
  struct Output {
    nn::Tensor probabilities;
    std::vector<double> composite;
  };
  Output predict(std::span<const EncodedPair> pairs, std::size_t batch = 256);

  const TaskSet& tasks() const { return tasks_; }
  std::vector<nn::Parameter*> parameters();
  std::size_t width() const { return 4 * config_.embedding_dim; }

  nlohmann::json descriptor() const;
  nn::Checkpoint to_checkpoint() const;
  static DeepCrossingModel from_checkpoint(const nn::Checkpoint& ckpt);

 private:
  std::size_t vocab_size_;
  DeepCrossingConfig config_;
  TaskSet tasks_;
  nn::EmbeddingSum embedding_;
  std::vector<nn::ResidualUnit> residual_;
  nn::Dense heads_;
};

/// sum_t w_t * p_t for one row of head probabilities.
double composite_score(std::span<const double> head_probabilities, const TaskSet& tasks);

/// Per-task binary labels, row-major [B, T].
std::vector<double> task_labels(std::span<const GradedLabel> labels, const TaskSet& tasks);

/// sum_t w_t * CE(p_t, label_t), averaged over rows. `labels` must hold one
/// entry per (row, task).
nn::Var mtl_loss(nn::Tape& t, nn::Var probabilities, std::vector<double> labels,
                 const TaskSet& tasks);

}  // namespace weakmatch
