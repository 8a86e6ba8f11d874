#pragma once

#include <string>
#include <vector>

#include "weakmatch/corpus.hpp"

namespace weakmatch {

enum class LabelSet { ac, lp };

const char* label_set_name(LabelSet s);
LabelSet parse_label_set(const std::string& name);
int max_label(LabelSet s);

/// A binary task carved out of a graded label set: grades 0..max_negative
/// are negatives, the rest positives. max_negative == 0 is the main task.
struct TaskBinarization {
  LabelSet label_set = LabelSet::ac;
  int max_negative = 0;

  bool is_main() const { return max_negative == 0; }
  std::string name() const;
  bool operator==(const TaskBinarization&) const = default;
};

/// 0 iff `value` is in the negative set. Throws ConfigError when `value` is
/// outside the label set's range or the task is malformed.
int binarize(int value, const TaskBinarization& task);
int binarize(const GradedLabel& label, const TaskBinarization& task);

/// Main-task AC binarization, used as the binary relevance label everywhere
/// a single label is needed (fine-tuning, evaluation).
inline int main_label(const GradedLabel& label) {
  return binarize(label, TaskBinarization{LabelSet::ac, 0});
}

struct WeightedTask {
  TaskBinarization task;
  double weight = 0.0;
  bool operator==(const WeightedTask&) const = default;
};

/// Weighted task list for multi-task training. Invariants: weights sum to 1;
/// exactly one main task per label set used; when auxiliary tasks exist the
/// main tasks share weight 0.5 and the auxiliary tasks split the rest evenly.
class TaskSet {
 public:
  explicit TaskSet(std::vector<WeightedTask> tasks);

  /// Main task on AC only, weight 1.
  static TaskSet single_task();
  /// Main plus all auxiliary tasks of each listed label set.
  static TaskSet multi_task(const std::vector<LabelSet>& label_sets);

  const std::vector<WeightedTask>& tasks() const { return tasks_; }
  std::size_t size() const { return tasks_.size(); }
  bool operator==(const TaskSet&) const = default;

 private:
  std::vector<WeightedTask> tasks_;
};

}  // namespace weakmatch
