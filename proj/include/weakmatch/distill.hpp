#pragma once

#include <span>
#include <string>
#include <vector>

#include "weakmatch/featurize.hpp"
#include "weakmatch/models.hpp"
#include "weakmatch/tensor.hpp"
#include "weakmatch/training.hpp"

namespace weakmatch {

/// Target function: f1 thresholds the teacher score at 0.5, f2 passes it through.
enum class TargetFn { f1, f2 };
/// Weight function: g1 zeroes scores strictly inside (t1, t2), g2 is
/// |2s - 1|^p, g3 is constant 1.
enum class WeightFn { g1, g2, g3 };

struct MappingConfig {
  TargetFn target = TargetFn::f2;
  WeightFn weight = WeightFn::g3;
  double t1 = 0.4;
  double t2 = 0.6;
  double p = 2.0;

  /// Throws ConfigError unless 0 <= t1 < t2 <= 1 and p > 0.
  void validate() const;
  /// "f2:g3" style name.
  std::string name() const;
  /// Parses "fN:gM", keeping the default thresholds and exponent.
  static MappingConfig parse(const std::string& text);
};

/// Both throw RuntimeError when s is outside [0,1] or not finite.
double map_target(double s, const MappingConfig& config);
double map_weight(double s, const MappingConfig& config);

struct StudentConfig {
  CdssmConfig cdssm;
  MappingConfig mapping;
  TrainConfig train{10, 64, 0.05, 0.9, 3, 1};
};

/// Trains a fresh CDSSM on teacher scores. f1 targets use weighted
/// cross-entropy, f2 targets weighted squared error; batches whose weights
/// are all zero are skipped. Throws ConfigError when every weight is zero.
CdssmModel train_student(std::size_t vocab_size, std::span<const EncodedPair> pairs,
                         std::span<const double> teacher_scores, const StudentConfig& config,
                         const ValidationSet& validation, TrainHistory* history = nullptr);

enum class FinetuneMode { hard, soft, label_aware };

const char* finetune_mode_name(FinetuneMode mode);
FinetuneMode parse_finetune_mode(const std::string& name);

struct FinetuneConfig {
  FinetuneMode mode = FinetuneMode::label_aware;
  double theta = 0.5;
  TrainConfig train{10, 32, 0.02, 0.9, 3, 1};

  /// Throws ConfigError unless theta is in [0,1].
  void validate() const;
};

/// theta when x <= 0, else 1.
double delta_theta(double x, double theta);

/// Weight of one labeled sample with soft target y, prediction yhat and
/// binary label ytilde: delta(y - yhat) for positives and
/// theta + 1 - delta(y - yhat) for negatives. Over-prediction on a positive
/// and under-prediction on a negative are the forgiven directions.
double label_aware_weight(double y, double yhat, int ytilde, double theta);

/// Batch loss for fine-tuning: hard is cross-entropy against ytilde, soft is
/// squared error against y, label-aware is squared error weighted by
/// label_aware_weight (evaluated at the current predictions and held fixed).
nn::Var finetune_loss(nn::Tape& t, nn::Var yhat, std::span<const double> soft_targets,
                      std::span<const int> binary_labels, FinetuneMode mode, double theta);

/// Continues training `student` on labeled pairs carrying both a soft target
/// and a binary label.
CdssmModel finetune(CdssmModel student, std::span<const EncodedPair> pairs,
                    std::span<const double> soft_targets, std::span<const int> binary_labels,
                    const FinetuneConfig& config, const ValidationSet& validation,
                    TrainHistory* history = nullptr);

/// CDSSM trained from scratch on binary labels with cross-entropy.
CdssmModel train_labeled_baseline(std::size_t vocab_size, std::span<const EncodedPair> pairs,
                                  std::span<const int> binary_labels, const CdssmConfig& cdssm,
                                  const TrainConfig& train, const ValidationSet& validation,
                                  TrainHistory* history = nullptr);

/// CDSSM trained on clicked pairs as positives, with one in-batch negative
/// per positive: the query paired with another row's listing.
CdssmModel train_click_baseline(std::size_t vocab_size, std::span<const EncodedPair> clicked,
                                const CdssmConfig& cdssm, const TrainConfig& train,
                                const ValidationSet& validation,
                                TrainHistory* history = nullptr);

}  // namespace weakmatch
