#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "weakmatch/annotate.hpp"
#include "weakmatch/corpus.hpp"
#include "weakmatch/distill.hpp"
#include "weakmatch/featurize.hpp"

namespace weakmatch {

struct ProtocolConfig {
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<double> thetas{0.0, 0.2, 0.5, 0.8, 1.0};
  std::vector<double> rhos{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<std::string> mappings{"f1:g1", "f1:g2", "f2:g3"};
};

/// Every knob of a run. Training seeds are not configured directly: each
/// trained component derives its seed from `seed` and its own name.
struct RunConfig {
  std::uint64_t seed = 1;
  std::string artifact_dir = "runs/default";
  CorpusSpec corpus;
  double validation_fraction = 0.1;
  FieldLimits limits;
  std::vector<AnnotatorKind> annotators{AnnotatorKind::dc, AnnotatorKind::gbdt};
  AnnotatorConfig annotator;
  StudentConfig student;
  FinetuneConfig finetune;
  TrainConfig labeled_baseline{20, 64, 0.02, 0.9, 3, 1};
  TrainConfig click_baseline{3, 64, 0.05, 0.9, 3, 1};
  ProtocolConfig protocol;

  void validate() const;
  nlohmann::json to_json() const;
  /// Starts from the defaults and overlays `j`. Throws ConfigError on keys
  /// absent from the defaults, on type mismatches and on invalid values.
  static RunConfig from_json(const nlohmann::json& j);
  /// 16 hex digits over the canonical JSON dump, artifact_dir excluded.
  std::string hash() const;
};

/// Reads a JSON config file; a missing file is a ConfigError.
RunConfig load_run_config(const std::filesystem::path& path);

/// WEAKMATCH_SEED and WEAKMATCH_ARTIFACT_DIR, when set, replace the
/// corresponding fields.
void apply_env_overrides(RunConfig& config);

}  // namespace weakmatch
