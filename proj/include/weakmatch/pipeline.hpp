#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "weakmatch/annotate.hpp"
#include "weakmatch/config.hpp"
#include "weakmatch/distill.hpp"
#include "weakmatch/metrics.hpp"

namespace weakmatch {

/// Datasets of one corpus together with their featurized forms. The trigram
/// vocabulary covers the labeled, unlabeled and clicked texts; test texts
/// are hashed against it.
struct PreparedData {
  TrigramVocab vocab;
  std::vector<LabeledSample> labeled;
  std::vector<LabeledSample> test;
  std::vector<UnlabeledPair> unlabeled;
  std::vector<UnlabeledPair> clicked;
  std::vector<EncodedPair> test_encoded;
  std::vector<EncodedPair> unlabeled_encoded;
  std::vector<EncodedPair> clicked_encoded;
  std::vector<int> test_labels;
};

PreparedData prepare_data(Corpus corpus, const FieldLimits& limits);

/// Canonical ensemble name: member kinds joined by '+' ("dc+gbdt"). The
/// annotator id "dc-single" names a DC trained on the main task only.
std::string ensemble_name(const std::vector<std::string>& members);
std::vector<std::string> ensemble_members(const std::string& name);

/// All trained components of one (seed, rho) cell, built on demand and
/// cached by name. Each component's training seed is derived from the cell
/// seed and the component name, so a component is the same whichever
/// protocol asks for it first.
class Experiment {
 public:
  Experiment(const RunConfig& config, const PreparedData& data, std::uint64_t seed,
             double rho = 1.0);

  std::uint64_t seed() const { return seed_; }
  double rho() const { return rho_; }
  std::size_t train_size() const { return train_.size(); }

  /// "dc", "dc-single" or "gbdt".
  Annotator& annotator(const std::string& id);
  /// Mean annotator scores on the unlabeled set and on the labeled training split.
  const std::vector<double>& unlabeled_scores(const std::string& ensemble);
  const std::vector<double>& train_scores(const std::string& ensemble);

  CdssmModel& student(const std::string& ensemble, const MappingConfig& mapping);
  CdssmModel& finetuned(const std::string& ensemble, const MappingConfig& mapping,
                        const FinetuneConfig& finetune);
  CdssmModel& labeled_baseline();
  CdssmModel& click_baseline();

  /// Test-set report tagged with this cell's seed, rho and config hash.
  MetricsReport evaluate(const std::string& name, std::span<const double> scores) const;
  MetricsReport evaluate_model(const std::string& name, CdssmModel& model) const;
  MetricsReport evaluate_annotators(const std::string& ensemble);

  const std::vector<LabeledSample>& train() const { return train_; }
  const std::vector<EncodedPair>& train_encoded() const { return train_encoded_; }
  const ValidationSet& validation() const { return validation_; }
  const TrainHistory* history(const std::string& component) const;

 private:
  std::uint64_t component_seed(const std::string& component) const;
  void record(const std::string& component, TrainHistory h);

  const RunConfig& config_;
  const PreparedData& data_;
  std::uint64_t seed_;
  double rho_;
  std::vector<LabeledSample> train_;
  std::vector<LabeledSample> validation_samples_;
  std::vector<EncodedPair> train_encoded_;
  std::vector<EncodedPair> validation_encoded_;
  std::vector<int> train_binary_;
  std::vector<GradedLabel> train_labels_;
  ValidationSet validation_;

  std::map<std::string, std::unique_ptr<Annotator>> annotators_;
  std::map<std::string, std::vector<double>> unlabeled_scores_;
  std::map<std::string, std::vector<double>> train_scores_;
  std::map<std::string, std::unique_ptr<CdssmModel>> models_;
  std::map<std::string, TrainHistory> histories_;
};

/// Experiments keyed by (seed, rho), sharing one configuration and dataset.
class ExperimentSet {
 public:
  ExperimentSet(RunConfig config, const PreparedData& data);
  Experiment& get(std::uint64_t seed, double rho = 1.0);
  const RunConfig& config() const { return config_; }
  const PreparedData& data() const { return data_; }

 private:
  RunConfig config_;
  const PreparedData& data_;
  std::map<std::pair<std::uint64_t, double>, std::unique_ptr<Experiment>> cells_;
};

struct PipelineArtifacts {
  std::filesystem::path run_dir;
  std::vector<std::filesystem::path> files;
  MetricsReport report;
};

/// Annotators, scoring, student training and fine-tuning for config.seed,
/// writing config, checkpoints, scored sets and the metrics report under
/// config.artifact_dir.
PipelineArtifacts run_pipeline(const RunConfig& config);

/// Writes `<dir>/config.json` with the resolved config and its hash.
void write_run_config(const std::filesystem::path& dir, const RunConfig& config);

}  // namespace weakmatch
