#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace weakmatch {

struct GbdtConfig {
  std::size_t n_trees = 200;
  std::size_t max_depth = 4;
  double shrinkage = 0.1;
  std::size_t min_samples_leaf = 20;
  double l2 = 0.0;  // leaf-value regularizer; 0 gives the plain Newton step
  std::uint64_t seed = 0;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

/// Rows go left when feature < threshold.
struct Tree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const;
  std::size_t depth() const;
  bool operator==(const Tree&) const = default;
};

class GbdtModel {
 public:
  std::size_t n_features = 0;
  double base_score = 0.0;  // logit of the class prior
  double shrinkage = 0.1;
  std::vector<Tree> trees;

  /// base + shrinkage * sum of leaf values.
  double margin(std::span<const double> x) const;
  /// sigmoid(margin). Throws RuntimeError on feature-length mismatch.
  double score(std::span<const double> x) const;

  void save(const std::filesystem::path& path) const;
  static GbdtModel load(const std::filesystem::path& path);
  bool operator==(const GbdtModel&) const = default;
};

struct GbdtTrainResult {
  GbdtModel model;
  std::vector<double> loss_trace;  // mean training log-loss, before and after each tree
  bool degenerate = false;         // single-class input: prior-only model
};

/// Boosts logistic loss with exact greedy splits over sorted unique values
/// and Newton leaf values -G/(H + l2).
GbdtTrainResult gbdt_train(const std::vector<std::vector<double>>& features,
                           std::span<const int> labels, const GbdtConfig& config);

double log_loss(std::span<const double> probabilities, std::span<const int> labels);

}  // namespace weakmatch
