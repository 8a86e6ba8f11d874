#include "weakmatch/annotate.hpp"

#include <fstream>

#include "weakmatch/error.hpp"
#include "weakmatch/rng.hpp"
#include "tsv.hpp"

namespace weakmatch {

const char* annotator_kind_name(AnnotatorKind kind) {
  return kind == AnnotatorKind::dc ? "dc" : "gbdt";
}

AnnotatorKind parse_annotator_kind(const std::string& name) {
  if (name == "dc") return AnnotatorKind::dc;
  if (name == "gbdt" || name == "dt") return AnnotatorKind::gbdt;
  throw ConfigError("unknown annotator kind '" + name + "' (expected dc or gbdt)");
}

std::vector<double> DcAnnotator::score(std::span<const EncodedPair> pairs) {
  return model_.predict(pairs).composite;
}

void DcAnnotator::save(const std::filesystem::path& path, const std::string& vocab_path,
                       const std::string& config_hash) const {
  auto ckpt = model_.to_checkpoint();
  ckpt.vocab_path = vocab_path;
  ckpt.config_hash = config_hash;
  nn::save_checkpoint(path, ckpt);
}

std::vector<double> GbdtAnnotator::score(std::span<const EncodedPair> pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(model_.score(p.lexical));
  return out;
}

void GbdtAnnotator::save(const std::filesystem::path& path, const std::string&,
                         const std::string&) const {
  model_.save(path);
}

std::unique_ptr<Annotator> load_annotator(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  char magic[8] = {};
  in.read(magic, sizeof magic);
  in.close();
  if (std::string_view(magic, sizeof magic) == "WMCKPT01") {
    return std::make_unique<DcAnnotator>(
        DeepCrossingModel::from_checkpoint(nn::load_checkpoint(path)));
  }
  return std::make_unique<GbdtAnnotator>(GbdtModel::load(path));
}

TaskSet AnnotatorConfig::task_set() const {
  return multi_task ? TaskSet::multi_task(label_sets) : TaskSet::single_task();
}

namespace {

void require_both_classes(std::span<const int> labels, const char* what) {
  bool pos = false;
  bool neg = false;
  for (int y : labels) (y ? pos : neg) = true;
  if (!pos || !neg) {
    throw ConfigError(std::string(what) + ": training labels lack a main-task class");
  }
}

std::unique_ptr<Annotator> train_dc(std::span<const EncodedPair> pairs,
                                    std::span<const GradedLabel> labels,
                                    const ValidationSet& validation, std::size_t vocab_size,
                                    const AnnotatorConfig& config, TrainHistory* history) {
  DeepCrossingModel model(vocab_size, config.dc, config.task_set(),
                          derive_seed(config.train.seed, "dc-init"));
  const auto params = model.parameters();
  auto batch_loss = [&](nn::Tape& t, std::span<const std::size_t> rows) -> std::optional<nn::Var> {
    std::vector<const EncodedPair*> batch;
    std::vector<GradedLabel> batch_labels;
    batch.reserve(rows.size());
    batch_labels.reserve(rows.size());
    for (std::size_t r : rows) {
      batch.push_back(&pairs[r]);
      batch_labels.push_back(labels[r]);
    }
    auto probs = model.forward(t, batch, true);
    return mtl_loss(t, probs, task_labels(batch_labels, model.tasks()), model.tasks());
  };
  auto h = run_training(params, pairs.size(), batch_loss, validation,
                        [&] { return model.predict(validation.pairs).composite; }, config.train);
  if (history) *history = std::move(h);
  return std::make_unique<DcAnnotator>(std::move(model));
}

}  // namespace

std::unique_ptr<Annotator> train_annotator(AnnotatorKind kind, std::span<const EncodedPair> pairs,
                                           std::span<const GradedLabel> labels,
                                           const ValidationSet& validation,
                                           std::size_t vocab_size, const AnnotatorConfig& config,
                                           TrainHistory* history) {
  if (pairs.size() != labels.size()) {
    throw ConfigError("train_annotator: pairs and labels differ in length");
  }
  std::vector<int> binary;
  binary.reserve(labels.size());
  for (const auto& l : labels) binary.push_back(main_label(l));
  require_both_classes(binary, "train_annotator");

  if (kind == AnnotatorKind::dc) {
    return train_dc(pairs, labels, validation, vocab_size, config, history);
  }
  std::vector<std::vector<double>> features;
  features.reserve(pairs.size());
  for (const auto& p : pairs) features.emplace_back(p.lexical.begin(), p.lexical.end());
  auto gbdt_config = config.gbdt;
  gbdt_config.seed = derive_seed(config.train.seed, "gbdt");
  auto result = gbdt_train(features, binary, gbdt_config);
  if (history) {
    *history = {};
    for (std::size_t i = 0; i < result.loss_trace.size(); ++i) {
      history->epochs.push_back({i, result.loss_trace[i], 0.0});
    }
  }
  return std::make_unique<GbdtAnnotator>(std::move(result.model));
}

std::vector<double> ensemble_scores(std::span<Annotator* const> annotators,
                                    std::span<const EncodedPair> pairs) {
  if (annotators.empty()) throw ConfigError("ensemble: no annotators");
  std::vector<double> sum(pairs.size(), 0.0);
  for (auto* a : annotators) {
    const auto s = a->score(pairs);
    for (std::size_t i = 0; i < s.size(); ++i) sum[i] += s[i];
  }
  const double n = static_cast<double>(annotators.size());
  for (auto& v : sum) v /= n;
  return sum;
}

std::vector<ScoredSample> score_dataset(std::span<Annotator* const> annotators,
                                        std::span<const LabeledSample> samples,
                                        std::span<const EncodedPair> encoded) {
  if (samples.size() != encoded.size()) throw ConfigError("score_dataset: length mismatch");
  const auto s = ensemble_scores(annotators, encoded);
  std::vector<ScoredSample> out;
  out.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out.push_back({samples[i].query, samples[i].listing, s[i], samples[i].label,
                   main_label(samples[i].label)});
  }
  return out;
}

std::vector<ScoredSample> score_dataset(std::span<Annotator* const> annotators,
                                        std::span<const UnlabeledPair> pairs,
                                        std::span<const EncodedPair> encoded) {
  if (pairs.size() != encoded.size()) throw ConfigError("score_dataset: length mismatch");
  const auto s = ensemble_scores(annotators, encoded);
  std::vector<ScoredSample> out;
  out.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out.push_back({pairs[i].query, pairs[i].listing, s[i], std::nullopt, std::nullopt});
  }
  return out;
}

namespace {

constexpr std::string_view kScoredLabeledHeader =
    "query\tkeyword\tad_title\tlp_title\tac\tlp\ts\tytilde";
constexpr std::string_view kScoredUnlabeledHeader = "query\tkeyword\tad_title\tlp_title\ts";

}  // namespace

void save_scored(const std::filesystem::path& path, std::span<const ScoredSample> samples) {
  const bool labeled = !samples.empty() && samples.front().label.has_value();
  for (const auto& s : samples) {
    if (s.label.has_value() != labeled) {
      throw ConfigError("save_scored: mixed labeled and unlabeled samples");
    }
  }
  auto out = tsv::open_out(path);
  out << (labeled ? kScoredLabeledHeader : kScoredUnlabeledHeader) << '\n';
  for (const auto& s : samples) {
    out << s.query << '\t' << s.listing.keyword << '\t' << s.listing.ad_title << '\t'
        << s.listing.lp_title << '\t';
    if (labeled) out << s.label->ac << '\t' << s.label->lp << '\t';
    out << tsv::format_double(s.s);
    if (labeled) out << '\t' << main_label(*s.label);
    out << '\n';
  }
}

std::vector<ScoredSample> load_scored(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<ScoredSample> out;
  std::string line;
  if (!std::getline(in, line)) return out;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool labeled = false;
  if (line == kScoredLabeledHeader) {
    labeled = true;
  } else if (line != kScoredUnlabeledHeader) {
    tsv::bad_row(path, 1, "header does not match a scored schema: '" + line + "'");
  }
  const std::size_t n_cols = labeled ? 8 : 5;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = tsv::split_tabs(line);
    if (f.size() != n_cols) {
      tsv::bad_row(path, line_no,
                   "expected " + std::to_string(n_cols) + " columns, got " +
                       std::to_string(f.size()));
    }
    if (f[0].empty()) tsv::bad_row(path, line_no, "empty query");
    ScoredSample s;
    s.query = f[0];
    s.listing = {f[1], f[2], f[3]};
    const std::size_t s_col = labeled ? 6 : 4;
    s.s = tsv::parse_double(f[s_col], path, line_no, "s");
    if (s.s < 0.0 || s.s > 1.0) tsv::bad_row(path, line_no, "column s outside [0,1]");
    if (labeled) {
      GradedLabel label{tsv::parse_int(f[4], 0, kMaxAcLabel, path, line_no, "ac"),
                        tsv::parse_int(f[5], 0, kMaxLpLabel, path, line_no, "lp")};
      const int ytilde = tsv::parse_int(f[7], 0, 1, path, line_no, "ytilde");
      if (ytilde != main_label(label)) {
        tsv::bad_row(path, line_no, "column ytilde disagrees with ac");
      }
      s.label = label;
      s.binary_label = ytilde;
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace weakmatch
