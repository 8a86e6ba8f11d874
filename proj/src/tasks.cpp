#include "weakmatch/tasks.hpp"

#include <cmath>
#include <set>

#include "weakmatch/error.hpp"

namespace weakmatch {

const char* label_set_name(LabelSet s) { return s == LabelSet::ac ? "ac" : "lp"; }

LabelSet parse_label_set(const std::string& name) {
  if (name == "ac") return LabelSet::ac;
  if (name == "lp") return LabelSet::lp;
  throw ConfigError("unknown label set '" + name + "'");
}

int max_label(LabelSet s) { return s == LabelSet::ac ? kMaxAcLabel : kMaxLpLabel; }

std::string TaskBinarization::name() const {
  return std::string(label_set_name(label_set)) +
         (is_main() ? std::string("-main") : "-aux" + std::to_string(max_negative));
}

int binarize(int value, const TaskBinarization& task) {
  const int hi = max_label(task.label_set);
  if (task.max_negative < 0 || task.max_negative >= hi) {
    throw ConfigError("task " + task.name() + ": negative set must be a proper prefix of 0.." +
                      std::to_string(hi));
  }
  if (value < 0 || value > hi) {
    throw ConfigError(std::string(label_set_name(task.label_set)) + " label " +
                      std::to_string(value) + " outside 0.." + std::to_string(hi));
  }
  return value <= task.max_negative ? 0 : 1;
}

int binarize(const GradedLabel& label, const TaskBinarization& task) {
  return binarize(task.label_set == LabelSet::ac ? label.ac : label.lp, task);
}

TaskSet::TaskSet(std::vector<WeightedTask> tasks) : tasks_(std::move(tasks)) {
  if (tasks_.empty()) throw ConfigError("task set is empty");
  double total = 0.0, main_total = 0.0;
  std::set<std::pair<int, int>> seen;
  std::set<int> main_sets, used_sets;
  std::vector<double> aux_weights;
  for (const auto& wt : tasks_) {
    binarize(0, wt.task);  // validates the negative prefix
    if (!(wt.weight > 0.0)) throw ConfigError("task " + wt.task.name() + " has non-positive weight");
    if (!seen.insert({static_cast<int>(wt.task.label_set), wt.task.max_negative}).second) {
      throw ConfigError("duplicate task " + wt.task.name());
    }
    used_sets.insert(static_cast<int>(wt.task.label_set));
    total += wt.weight;
    if (wt.task.is_main()) {
      main_sets.insert(static_cast<int>(wt.task.label_set));
      main_total += wt.weight;
    } else {
      aux_weights.push_back(wt.weight);
    }
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("task weights must sum to 1");
  if (main_sets != used_sets) throw ConfigError("every label set needs exactly one main task");
  if (!aux_weights.empty()) {
    if (std::abs(main_total - 0.5) > 1e-9) {
      throw ConfigError("main tasks must carry combined weight 0.5");
    }
    for (double w : aux_weights) {
      if (std::abs(w - aux_weights[0]) > 1e-12) {
        throw ConfigError("auxiliary tasks must be evenly weighted");
      }
    }
  }
}

TaskSet TaskSet::single_task() { return TaskSet({{{LabelSet::ac, 0}, 1.0}}); }

TaskSet TaskSet::multi_task(const std::vector<LabelSet>& label_sets) {
  if (label_sets.empty()) throw ConfigError("multi_task: no label sets");
  std::size_t n_aux = 0;
  for (auto s : label_sets) n_aux += static_cast<std::size_t>(max_label(s) - 1);
  const double main_w = 0.5 / static_cast<double>(label_sets.size());
  const double aux_w = 0.5 / static_cast<double>(n_aux);
  std::vector<WeightedTask> tasks;
  for (auto s : label_sets) tasks.push_back({{s, 0}, main_w});
  for (auto s : label_sets) {
    for (int k = 1; k < max_label(s); ++k) tasks.push_back({{s, k}, aux_w});
  }
  return TaskSet(std::move(tasks));
}

}  // namespace weakmatch
