#include "weakmatch/distill.hpp"

#include <cmath>

#include "weakmatch/error.hpp"
#include "weakmatch/rng.hpp"

namespace weakmatch {

void MappingConfig::validate() const {
  if (!(t1 >= 0.0 && t1 < t2 && t2 <= 1.0)) {
    throw ConfigError("mapping: thresholds must satisfy 0 <= t1 < t2 <= 1");
  }
  if (!(p > 0.0)) throw ConfigError("mapping: exponent p must be positive");
}

std::string MappingConfig::name() const {
  std::string out = target == TargetFn::f1 ? "f1" : "f2";
  out += weight == WeightFn::g1 ? ":g1" : weight == WeightFn::g2 ? ":g2" : ":g3";
  return out;
}

MappingConfig MappingConfig::parse(const std::string& text) {
  MappingConfig c;
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("mapping '" + text + "' is not of form fN:gM");
  const std::string f = text.substr(0, colon);
  const std::string g = text.substr(colon + 1);
  if (f == "f1") {
    c.target = TargetFn::f1;
  } else if (f == "f2") {
    c.target = TargetFn::f2;
  } else {
    throw ConfigError("unknown target function '" + f + "'");
  }
  if (g == "g1") {
    c.weight = WeightFn::g1;
  } else if (g == "g2") {
    c.weight = WeightFn::g2;
  } else if (g == "g3") {
    c.weight = WeightFn::g3;
  } else {
    throw ConfigError("unknown weight function '" + g + "'");
  }
  return c;
}

namespace {

void check_score(double s) {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw RuntimeError("teacher score " + std::to_string(s) + " outside [0,1]");
  }
}

}  // namespace

double map_target(double s, const MappingConfig& config) {
  check_score(s);
  if (config.target == TargetFn::f1) return s >= 0.5 ? 1.0 : 0.0;
  return s;
}

double map_weight(double s, const MappingConfig& config) {
  check_score(s);
  switch (config.weight) {
    case WeightFn::g1: return (config.t1 < s && s < config.t2) ? 0.0 : 1.0;
    case WeightFn::g2: return std::pow(std::abs(2.0 * s - 1.0), config.p);
    case WeightFn::g3: return 1.0;
  }
  return 1.0;
}

namespace {

struct PairBatch {
  nn::WordBatch query;
  nn::WordBatch ad;
};

PairBatch make_batch(std::span<const EncodedPair> pairs, std::span<const std::size_t> rows) {
  std::vector<const FieldSequences*> fields;
  fields.reserve(rows.size());
  for (std::size_t r : rows) fields.push_back(&pairs[r].fields);
  return {query_words(fields), ad_words(fields)};
}

ValidationScoreFn cdssm_scorer(CdssmModel& model, const ValidationSet& validation) {
  return [&model, &validation] { return model.score_pairs(validation.pairs); };
}

}  // namespace

CdssmModel train_student(std::size_t vocab_size, std::span<const EncodedPair> pairs,
                         std::span<const double> teacher_scores, const StudentConfig& config,
                         const ValidationSet& validation, TrainHistory* history) {
  config.mapping.validate();
  if (pairs.size() != teacher_scores.size()) {
    throw ConfigError("train_student: pairs and scores differ in length");
  }
  std::vector<double> targets(pairs.size());
  std::vector<double> weights(pairs.size());
  bool any_weight = false;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    targets[i] = map_target(teacher_scores[i], config.mapping);
    weights[i] = map_weight(teacher_scores[i], config.mapping);
    any_weight = any_weight || weights[i] > 0.0;
  }
  if (!any_weight) throw ConfigError("train_student: no effective training signal");

  CdssmModel model(vocab_size, config.cdssm, derive_seed(config.train.seed, "student-init"));
  const bool use_ce = config.mapping.target == TargetFn::f1;
  auto batch_loss = [&](nn::Tape& t, std::span<const std::size_t> rows) -> std::optional<nn::Var> {
    std::vector<double> y;
    std::vector<double> w;
    double total = 0.0;
    for (std::size_t r : rows) {
      y.push_back(targets[r]);
      w.push_back(weights[r]);
      total += weights[r];
    }
    if (total == 0.0) return std::nullopt;
    auto batch = make_batch(pairs, rows);
    auto yhat = model.score(t, std::move(batch.query), std::move(batch.ad));
    return use_ce ? nn::cross_entropy(t, yhat, std::move(y), std::move(w))
                  : nn::weighted_mse(t, yhat, std::move(y), std::move(w));
  };
  auto h = run_training(model.parameters(), pairs.size(), batch_loss, validation,
                        cdssm_scorer(model, validation), config.train);
  if (history) *history = std::move(h);
  return model;
}

const char* finetune_mode_name(FinetuneMode mode) {
  switch (mode) {
    case FinetuneMode::hard: return "hard";
    case FinetuneMode::soft: return "soft";
    case FinetuneMode::label_aware: return "label-aware";
  }
  return "label-aware";
}

FinetuneMode parse_finetune_mode(const std::string& name) {
  if (name == "hard") return FinetuneMode::hard;
  if (name == "soft") return FinetuneMode::soft;
  if (name == "label-aware" || name == "label_aware") return FinetuneMode::label_aware;
  throw ConfigError("unknown fine-tune mode '" + name + "' (expected hard, soft or label-aware)");
}

void FinetuneConfig::validate() const {
  if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("finetune: theta must be in [0,1]");
  train.validate();
}

double delta_theta(double x, double theta) { return x <= 0.0 ? theta : 1.0; }

double label_aware_weight(double y, double yhat, int ytilde, double theta) {
  const double d = delta_theta(y - yhat, theta);
  // theta + 1 - d, selected rather than computed so the result is exactly theta or 1.
  if (ytilde == 1) return d;
  return d == 1.0 ? theta : 1.0;
}

nn::Var finetune_loss(nn::Tape& t, nn::Var yhat, std::span<const double> soft_targets,
                      std::span<const int> binary_labels, FinetuneMode mode, double theta) {
  const std::size_t n = soft_targets.size();
  if (binary_labels.size() != n || t.value(yhat).size() != n) {
    throw RuntimeError("finetune_loss: batch size mismatch");
  }
  if (mode == FinetuneMode::hard) {
    std::vector<double> y(binary_labels.begin(), binary_labels.end());
    return nn::cross_entropy(t, yhat, std::move(y), std::vector<double>(n, 1.0));
  }
  std::vector<double> w(n, 1.0);
  if (mode == FinetuneMode::label_aware) {
    const auto& pred = t.value(yhat);
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = label_aware_weight(soft_targets[i], pred[i], binary_labels[i], theta);
    }
  }
  return nn::weighted_mse(t, yhat, std::vector<double>(soft_targets.begin(), soft_targets.end()),
                          std::move(w));
}

CdssmModel finetune(CdssmModel student, std::span<const EncodedPair> pairs,
                    std::span<const double> soft_targets, std::span<const int> binary_labels,
                    const FinetuneConfig& config, const ValidationSet& validation,
                    TrainHistory* history) {
  config.validate();
  if (pairs.size() != soft_targets.size() || pairs.size() != binary_labels.size()) {
    throw ConfigError("finetune: pairs, targets and labels differ in length");
  }
  auto batch_loss = [&](nn::Tape& t, std::span<const std::size_t> rows) -> std::optional<nn::Var> {
    std::vector<double> y;
    std::vector<int> b;
    for (std::size_t r : rows) {
      y.push_back(soft_targets[r]);
      b.push_back(binary_labels[r]);
    }
    auto batch = make_batch(pairs, rows);
    auto yhat = student.score(t, std::move(batch.query), std::move(batch.ad));
    return finetune_loss(t, yhat, y, b, config.mode, config.theta);
  };
  auto h = run_training(student.parameters(), pairs.size(), batch_loss, validation,
                        cdssm_scorer(student, validation), config.train);
  if (history) *history = std::move(h);
  return student;
}

CdssmModel train_labeled_baseline(std::size_t vocab_size, std::span<const EncodedPair> pairs,
                                  std::span<const int> binary_labels, const CdssmConfig& cdssm,
                                  const TrainConfig& train, const ValidationSet& validation,
                                  TrainHistory* history) {
  if (pairs.size() != binary_labels.size()) {
    throw ConfigError("labeled baseline: pairs and labels differ in length");
  }
  CdssmModel model(vocab_size, cdssm, derive_seed(train.seed, "labeled-init"));
  auto batch_loss = [&](nn::Tape& t, std::span<const std::size_t> rows) -> std::optional<nn::Var> {
    std::vector<double> y;
    for (std::size_t r : rows) y.push_back(binary_labels[r]);
    auto batch = make_batch(pairs, rows);
    auto yhat = model.score(t, std::move(batch.query), std::move(batch.ad));
    return nn::cross_entropy(t, yhat, std::move(y), std::vector<double>(rows.size(), 1.0));
  };
  auto h = run_training(model.parameters(), pairs.size(), batch_loss, validation,
                        cdssm_scorer(model, validation), train);
  if (history) *history = std::move(h);
  return model;
}

CdssmModel train_click_baseline(std::size_t vocab_size, std::span<const EncodedPair> clicked,
                                const CdssmConfig& cdssm, const TrainConfig& train,
                                const ValidationSet& validation, TrainHistory* history) {
  CdssmModel model(vocab_size, cdssm, derive_seed(train.seed, "click-init"));
  Rng rng(derive_seed(train.seed, "click-negatives"));
  auto batch_loss = [&](nn::Tape& t, std::span<const std::size_t> rows) -> std::optional<nn::Var> {
    const std::size_t b = rows.size();
    if (b < 2) return std::nullopt;
    // Cyclic shift by a random non-zero offset pairs every query with a
    // listing from a different row.
    const std::size_t shift = 1 + rng.index(b - 1);
    std::vector<const FieldSequences*> q;
    std::vector<const FieldSequences*> a;
    for (std::size_t i = 0; i < b; ++i) {
      q.push_back(&clicked[rows[i]].fields);
      a.push_back(&clicked[rows[i]].fields);
    }
    for (std::size_t i = 0; i < b; ++i) {
      q.push_back(&clicked[rows[i]].fields);
      a.push_back(&clicked[rows[(i + shift) % b]].fields);
    }
    std::vector<double> y(2 * b, 0.0);
    std::fill(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(b), 1.0);
    auto yhat = model.score(t, query_words(q), ad_words(a));
    return nn::cross_entropy(t, yhat, std::move(y), std::vector<double>(2 * b, 1.0));
  };
  auto h = run_training(model.parameters(), clicked.size(), batch_loss, validation,
                        cdssm_scorer(model, validation), train);
  if (history) *history = std::move(h);
  return model;
}

}  // namespace weakmatch
