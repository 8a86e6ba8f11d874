#include "weakmatch/protocols.hpp"

#include <map>

#include "weakmatch/error.hpp"
#include "tsv.hpp"

namespace weakmatch {

const char* protocol_name(Protocol p) {
  switch (p) {
    case Protocol::baselines: return "baselines";
    case Protocol::mapping_grid: return "mapping-grid";
    case Protocol::theta_sweep: return "theta-sweep";
    case Protocol::rho_sweep: return "rho-sweep";
  }
  return "baselines";
}

Protocol parse_protocol(const std::string& name) {
  for (auto p : {Protocol::baselines, Protocol::mapping_grid, Protocol::theta_sweep,
                 Protocol::rho_sweep}) {
    if (name == protocol_name(p)) return p;
  }
  throw ConfigError("unknown protocol '" + name +
                    "' (expected baselines, mapping-grid, theta-sweep or rho-sweep)");
}

const MetricsReport& ProtocolOutput::row(const std::string& name) const {
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      if (p.report.name == name) return p.report;
    }
  }
  throw RuntimeError("protocol output has no row '" + name + "'");
}

std::vector<MetricsReport> average_by_name(const std::vector<MetricsReport>& cells) {
  std::vector<MetricsReport> out;
  std::map<std::string, std::size_t> index;
  std::vector<std::size_t> counts;
  for (const auto& c : cells) {
    auto [it, fresh] = index.emplace(c.name, out.size());
    if (fresh) {
      MetricsReport r;
      r.name = c.name;
      r.config_hash = c.config_hash;
      r.sizes = c.sizes;
      r.tags = c.tags;
      out.push_back(r);
      counts.push_back(0);
    }
    auto& r = out[it->second];
    r.roc_auc += c.roc_auc;
    r.pr_auc += c.pr_auc;
    r.tags["seeds"] += (counts[it->second] ? "," : "") + std::to_string(c.seed);
    ++counts[it->second];
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].roc_auc /= static_cast<double>(counts[i]);
    out[i].pr_auc /= static_cast<double>(counts[i]);
  }
  return out;
}

namespace {

std::string configured_ensemble(const RunConfig& config) {
  std::vector<std::string> names;
  for (auto k : config.annotators) names.push_back(annotator_kind_name(k));
  return ensemble_name(names);
}

SweepResult categorical(const std::string& axis, const std::vector<MetricsReport>& rows) {
  SweepResult s;
  s.axis = axis;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    s.points.push_back({static_cast<double>(i), rows[i].name, rows[i]});
  }
  return s;
}

void run_baselines(ExperimentSet& set, ProtocolOutput& out) {
  const auto& config = set.config();
  for (auto seed : config.protocol.seeds) {
    Experiment& e = set.get(seed);
    out.cells.push_back(e.evaluate_model("cdssm-click", e.click_baseline()));
    out.cells.push_back(e.evaluate_model("cdssm-labeled", e.labeled_baseline()));
    const std::vector<std::string> ensembles{"dc", "gbdt", "dc+gbdt"};
    for (const auto& ens : ensembles) out.cells.push_back(e.evaluate_annotators(ens));
    for (const auto& ens : ensembles) {
      out.cells.push_back(
          e.evaluate_model("student:" + ens, e.student(ens, config.student.mapping)));
    }
    for (const auto& ens : ensembles) {
      out.cells.push_back(e.evaluate_model(
          "ft:" + ens, e.finetuned(ens, config.student.mapping, config.finetune)));
    }
  }
  out.series.push_back(categorical("model", average_by_name(out.cells)));
}

void run_mapping_grid(ExperimentSet& set, ProtocolOutput& out) {
  const auto& config = set.config();
  for (auto seed : config.protocol.seeds) {
    Experiment& e = set.get(seed);
    for (const std::string annotator : {"dc-single", "dc"}) {
      out.cells.push_back(e.evaluate_annotators(annotator));
      for (const auto& name : config.protocol.mappings) {
        MappingConfig m = MappingConfig::parse(name);
        m.t1 = config.student.mapping.t1;
        m.t2 = config.student.mapping.t2;
        m.p = config.student.mapping.p;
        out.cells.push_back(
            e.evaluate_model("student:" + annotator + ":" + name, e.student(annotator, m)));
        out.cells.push_back(e.evaluate_model("ft:" + annotator + ":" + name,
                                             e.finetuned(annotator, m, config.finetune)));
      }
    }
  }
  out.series.push_back(categorical("model", average_by_name(out.cells)));
}

void run_theta_sweep(ExperimentSet& set, ProtocolOutput& out) {
  const auto& config = set.config();
  const std::string ens = configured_ensemble(config);
  for (auto seed : config.protocol.seeds) {
    Experiment& e = set.get(seed);
    FinetuneConfig fc = config.finetune;
    fc.mode = FinetuneMode::hard;
    out.cells.push_back(e.evaluate_model("hard", e.finetuned(ens, config.student.mapping, fc)));
    fc.mode = FinetuneMode::soft;
    out.cells.push_back(e.evaluate_model("soft", e.finetuned(ens, config.student.mapping, fc)));
    fc.mode = FinetuneMode::label_aware;
    for (double theta : config.protocol.thetas) {
      fc.theta = theta;
      auto r = e.evaluate_model("theta=" + tsv::format_double(theta),
                                e.finetuned(ens, config.student.mapping, fc));
      r.tags["theta"] = tsv::format_double(theta);
      out.cells.push_back(r);
    }
  }
  out.series.push_back(categorical("finetune", average_by_name(out.cells)));
}

void run_rho_sweep(ExperimentSet& set, ProtocolOutput& out) {
  const auto& config = set.config();
  const std::string ens = configured_ensemble(config);
  for (auto seed : config.protocol.seeds) {
    for (double rho : config.protocol.rhos) {
      Experiment& e = set.get(seed, rho);
      const std::string tag = "@rho=" + tsv::format_double(rho);
      out.cells.push_back(e.evaluate_model("labeled" + tag, e.labeled_baseline()));
      out.cells.push_back(e.evaluate_model(
          "pipeline" + tag, e.finetuned(ens, config.student.mapping, config.finetune)));
    }
  }
  const auto rows = average_by_name(out.cells);
  for (const std::string series : {"labeled", "pipeline"}) {
    SweepResult s;
    s.axis = "rho";
    for (const auto& r : rows) {
      if (r.name.rfind(series + "@", 0) != 0) continue;
      s.points.push_back({std::stod(r.tags.at("rho")), "", r});
    }
    s.check_sorted();
    out.series.push_back(std::move(s));
  }
}

}  // namespace

ProtocolOutput run_protocol(Protocol protocol, ExperimentSet& experiments) {
  ProtocolOutput out;
  out.protocol = protocol;
  switch (protocol) {
    case Protocol::baselines: run_baselines(experiments, out); break;
    case Protocol::mapping_grid: run_mapping_grid(experiments, out); break;
    case Protocol::theta_sweep: run_theta_sweep(experiments, out); break;
    case Protocol::rho_sweep: run_rho_sweep(experiments, out); break;
  }
  return out;
}

std::vector<std::filesystem::path> write_protocol(const ProtocolOutput& out,
                                                  const std::filesystem::path& dir) {
  const std::string base = protocol_name(out.protocol);
  std::vector<std::filesystem::path> files;
  {
    const auto path = dir / (base + ".jsonl");
    auto f = tsv::open_out(path);
    for (const auto& c : out.cells) f << c.to_json().dump() << '\n';
    files.push_back(path);
  }
  {
    const auto path = dir / (base + ".txt");
    auto f = tsv::open_out(path);
    for (std::size_t i = 0; i < out.series.size(); ++i) {
      if (i) f << '\n';
      f << out.series[i].render_table();
    }
    files.push_back(path);
  }
  for (std::size_t i = 0; i < out.series.size(); ++i) {
    const auto& s = out.series[i];
    std::string name = base;
    if (out.series.size() > 1) {
      const auto& first = s.points.empty() ? std::string() : s.points.front().report.name;
      name += "-" + first.substr(0, first.find('@'));
    }
    const auto path = dir / (name + ".dat");
    auto f = tsv::open_out(path);
    f << s.render_dat();
    files.push_back(path);
  }
  return files;
}

}  // namespace weakmatch
