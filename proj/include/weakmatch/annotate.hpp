#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "weakmatch/corpus.hpp"
#include "weakmatch/featurize.hpp"
#include "weakmatch/gbdt.hpp"
#include "weakmatch/models.hpp"
#include "weakmatch/tasks.hpp"
#include "weakmatch/training.hpp"

namespace weakmatch {

enum class AnnotatorKind { dc, gbdt };

const char* annotator_kind_name(AnnotatorKind kind);
AnnotatorKind parse_annotator_kind(const std::string& name);

/// A frozen teacher that maps featurized pairs to scores in [0,1].
class Annotator {
 public:
  virtual ~Annotator() = default;
  virtual AnnotatorKind kind() const = 0;
  virtual std::vector<double> score(std::span<const EncodedPair> pairs) = 0;
  virtual void save(const std::filesystem::path& path, const std::string& vocab_path,
                    const std::string& config_hash) const = 0;
};

class DcAnnotator : public Annotator {
 public:
  explicit DcAnnotator(DeepCrossingModel model) : model_(std::move(model)) {}
  AnnotatorKind kind() const override { return AnnotatorKind::dc; }
  /// Composite score sum_t w_t p_t.
  std::vector<double> score(std::span<const EncodedPair> pairs) override;
  void save(const std::filesystem::path& path, const std::string& vocab_path,
            const std::string& config_hash) const override;
  DeepCrossingModel& model() { return model_; }

 private:
  DeepCrossingModel model_;
};

class GbdtAnnotator : public Annotator {
 public:
  explicit GbdtAnnotator(GbdtModel model) : model_(std::move(model)) {}
  AnnotatorKind kind() const override { return AnnotatorKind::gbdt; }
  std::vector<double> score(std::span<const EncodedPair> pairs) override;
  void save(const std::filesystem::path& path, const std::string& vocab_path,
            const std::string& config_hash) const override;
  const GbdtModel& model() const { return model_; }

 private:
  GbdtModel model_;
};

/// Loads a DC checkpoint or a GBDT text model, telling them apart by content.
std::unique_ptr<Annotator> load_annotator(const std::filesystem::path& path);

struct AnnotatorConfig {
  DeepCrossingConfig dc;
  std::vector<LabelSet> label_sets{LabelSet::ac, LabelSet::lp};
  bool multi_task = true;
  TrainConfig train{20, 64, 0.05, 0.9, 3, 1};
  GbdtConfig gbdt;

  TaskSet task_set() const;
};

/// Trains a DC annotator with mtl_loss over the configured task set (early
/// stopping on validation main-task ROC AUC, best epoch returned) or a GBDT
/// on the main task. Throws ConfigError when the training labels lack either
/// main-task class.
std::unique_ptr<Annotator> train_annotator(AnnotatorKind kind, std::span<const EncodedPair> pairs,
                                           std::span<const GradedLabel> labels,
                                           const ValidationSet& validation,
                                           std::size_t vocab_size, const AnnotatorConfig& config,
                                           TrainHistory* history = nullptr);

struct ScoredSample {
  std::string query;
  AdListing listing;
  double s = 0.0;
  std::optional<GradedLabel> label;
  std::optional<int> binary_label;  // main-task binarization of `label`

  bool operator==(const ScoredSample&) const = default;
};

/// Arithmetic mean of the annotators' scores, per pair.
std::vector<double> ensemble_scores(std::span<Annotator* const> annotators,
                                    std::span<const EncodedPair> pairs);

std::vector<ScoredSample> score_dataset(std::span<Annotator* const> annotators,
                                        std::span<const LabeledSample> samples,
                                        std::span<const EncodedPair> encoded);
std::vector<ScoredSample> score_dataset(std::span<Annotator* const> annotators,
                                        std::span<const UnlabeledPair> pairs,
                                        std::span<const EncodedPair> encoded);

/// Input TSV columns plus `s` (and `ytilde` when labeled).
void save_scored(const std::filesystem::path& path, std::span<const ScoredSample> samples);
std::vector<ScoredSample> load_scored(const std::filesystem::path& path);

}  // namespace weakmatch
