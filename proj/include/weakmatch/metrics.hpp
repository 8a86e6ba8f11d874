#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace weakmatch {

/// Probability that a random positive outranks a random negative, ties
/// counted one half. Throws RuntimeError unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

/// Average precision over distinct score thresholds: tied scores form one
/// threshold, and each positive contributes the precision at its
/// threshold. Throws RuntimeError when there is no positive.
double pr_auc(std::span<const double> scores, std::span<const int> labels);

struct MetricsReport {
  std::string name;
  double roc_auc = 0.0;
  double pr_auc = 0.0;
  std::map<std::string, std::size_t> sizes;
  std::uint64_t seed = 0;
  std::string config_hash;
  double wall_clock_seconds = 0.0;
  std::map<std::string, std::string> tags;

  /// One-line JSON record. Wall-clock time is left out unless requested, so
  /// reruns of the same configuration produce identical records.
  nlohmann::json to_json(bool include_timing = false) const;
  static MetricsReport from_json(const nlohmann::json& j);
};

MetricsReport evaluate(std::string name, std::span<const double> scores,
                       std::span<const int> labels);

struct SweepPoint {
  double axis_value = 0.0;
  std::string axis_label;  // for categorical axes (mapping names, baselines)
  MetricsReport report;
};

struct SweepResult {
  std::string axis;
  std::vector<SweepPoint> points;

  /// Throws RuntimeError unless numeric axis values are unique and ascending.
  void check_sorted() const;
  std::string render_table() const;
  /// Whitespace-separated columns for plotting: x, label, ROC AUC, PR AUC.
  /// x is the axis value, or the row index on categorical axes.
  std::string render_dat() const;
};

}  // namespace weakmatch
