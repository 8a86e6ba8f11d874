#include "weakmatch/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "weakmatch/error.hpp"

namespace weakmatch {

namespace {

std::vector<std::size_t> order_by_score_desc(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

void check_inputs(std::span<const double> scores, std::span<const int> labels, const char* fn) {
  if (scores.size() != labels.size()) {
    throw RuntimeError(std::string(fn) + ": score/label length mismatch");
  }
}

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels, "roc_auc");
  const auto idx = order_by_score_desc(scores);
  double pos = 0.0, neg = 0.0, wins = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    double gp = 0.0, gn = 0.0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] ? gp : gn) += 1.0;
      ++j;
    }
    // negatives in this tie group are beaten by every positive above it and
    // half-beaten by the tied positives
    wins += gn * (pos + 0.5 * gp);
    pos += gp;
    neg += gn;
    i = j;
  }
  if (pos == 0.0 || neg == 0.0) throw RuntimeError("roc_auc: both classes must be present");
  return wins / (pos * neg);
}

double pr_auc(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels, "pr_auc");
  const auto idx = order_by_score_desc(scores);
  const double total_pos =
      static_cast<double>(std::count_if(labels.begin(), labels.end(), [](int l) { return l != 0; }));
  if (total_pos == 0.0) throw RuntimeError("pr_auc: no positive samples");
  double tp = 0.0, seen = 0.0, ap = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    double gp = 0.0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      gp += labels[idx[j]] ? 1.0 : 0.0;
      ++j;
    }
    tp += gp;
    seen += static_cast<double>(j - i);
    if (gp > 0.0) ap += (gp / total_pos) * (tp / seen);
    i = j;
  }
  return ap;
}

nlohmann::json MetricsReport::to_json(bool include_timing) const {
  nlohmann::json j = {{"name", name},           {"roc_auc", roc_auc}, {"pr_auc", pr_auc},
                      {"pr_auc_rule", "average-precision"},
                      {"sizes", sizes},         {"seed", seed},       {"config_hash", config_hash},
                      {"tags", tags}};
  if (include_timing) j["wall_clock_seconds"] = wall_clock_seconds;
  return j;
}

MetricsReport MetricsReport::from_json(const nlohmann::json& j) {
  MetricsReport r;
  r.name = j.at("name").get<std::string>();
  r.roc_auc = j.at("roc_auc").get<double>();
  r.pr_auc = j.at("pr_auc").get<double>();
  r.sizes = j.at("sizes").get<std::map<std::string, std::size_t>>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.config_hash = j.at("config_hash").get<std::string>();
  r.tags = j.at("tags").get<std::map<std::string, std::string>>();
  r.wall_clock_seconds = j.value("wall_clock_seconds", 0.0);
  return r;
}

MetricsReport evaluate(std::string name, std::span<const double> scores,
                       std::span<const int> labels) {
  MetricsReport r;
  r.name = std::move(name);
  r.roc_auc = roc_auc(scores, labels);
  r.pr_auc = pr_auc(scores, labels);
  r.sizes["eval"] = labels.size();
  return r;
}

void SweepResult::check_sorted() const {
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].axis_label.empty() && !(points[i - 1].axis_value < points[i].axis_value)) {
      throw RuntimeError("sweep '" + axis + "': axis values must be unique and ascending");
    }
  }
}

std::string SweepResult::render_table() const {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof(line), "%-28s %10s %10s\n", axis.c_str(), "ROC AUC", "PR AUC");
  os << line;
  for (const auto& p : points) {
    std::string label = p.axis_label;
    if (label.empty()) {
      char v[32];
      std::snprintf(v, sizeof(v), "%g", p.axis_value);
      label = v;
    }
    std::snprintf(line, sizeof(line), "%-28s %10.4f %10.4f\n", label.c_str(), p.report.roc_auc,
                  p.report.pr_auc);
    os << line;
  }
  return os.str();
}

std::string SweepResult::render_dat() const {
  std::ostringstream os;
  os << "# " << axis << " label roc_auc pr_auc\n";
  char line[256];
  for (const auto& p : points) {
    const std::string label = p.axis_label.empty() ? p.report.name : p.axis_label;
    std::snprintf(line, sizeof(line), "%.17g %s %.17g %.17g\n", p.axis_value, label.c_str(),
                  p.report.roc_auc, p.report.pr_auc);
    os << line;
  }
  return os.str();
}

}  // namespace weakmatch
