#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "weakmatch/metrics.hpp"
#include "weakmatch/pipeline.hpp"

namespace weakmatch {

enum class Protocol { baselines, mapping_grid, theta_sweep, rho_sweep };

const char* protocol_name(Protocol p);
Protocol parse_protocol(const std::string& name);

struct ProtocolOutput {
  Protocol protocol = Protocol::baselines;
  /// One report per (row, seed).
  std::vector<MetricsReport> cells;
  /// Seed-averaged rows, one table per series.
  std::vector<SweepResult> series;

  /// Seed-averaged report of the row named `name`; throws RuntimeError if absent.
  const MetricsReport& row(const std::string& name) const;
};

/// Row names:
///  baselines     cdssm-click, cdssm-labeled, annotator:E, student:E, ft:E for
///                E in {dc, gbdt, dc+gbdt}
///  mapping-grid  annotator:A, student:A:M, ft:A:M for A in {dc-single, dc}
///                and every configured mapping M
///  theta-sweep   hard, soft, theta=T for every configured theta
///  rho-sweep     labeled@rho=R and pipeline@rho=R for every configured rho
/// Student rows use the configured mapping, fine-tuned rows the configured
/// fine-tune mode, both with the configured annotator ensemble where the row
/// does not name one.
ProtocolOutput run_protocol(Protocol protocol, ExperimentSet& experiments);

/// Mean ROC and PR AUC of reports sharing a name, in first-seen order.
std::vector<MetricsReport> average_by_name(const std::vector<MetricsReport>& cells);

/// `<dir>/<protocol>.jsonl` (cells), `<dir>/<protocol>.txt` (tables) and one
/// `<dir>/<protocol>[-<series>].dat` per series for plotting.
std::vector<std::filesystem::path> write_protocol(const ProtocolOutput& out,
                                                  const std::filesystem::path& dir);

}  // namespace weakmatch
