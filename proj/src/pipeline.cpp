#include "weakmatch/pipeline.hpp"

#include <fstream>

#include "weakmatch/error.hpp"
#include "weakmatch/rng.hpp"
#include "tsv.hpp"

namespace weakmatch {

PreparedData prepare_data(Corpus corpus, const FieldLimits& limits) {
  PreparedData d;
  d.labeled = std::move(corpus.labeled);
  d.test = std::move(corpus.test);
  d.unlabeled = std::move(corpus.unlabeled);
  d.clicked = std::move(corpus.clicked);
  std::vector<std::string> texts;
  collect_texts<LabeledSample>(d.labeled, texts);
  collect_texts<UnlabeledPair>(d.unlabeled, texts);
  collect_texts<UnlabeledPair>(d.clicked, texts);
  d.vocab = TrigramVocab::build(texts);
  d.test_encoded = encode_all<LabeledSample>(d.test, d.vocab, limits);
  d.unlabeled_encoded = encode_all<UnlabeledPair>(d.unlabeled, d.vocab, limits);
  d.clicked_encoded = encode_all<UnlabeledPair>(d.clicked, d.vocab, limits);
  for (const auto& s : d.test) d.test_labels.push_back(main_label(s.label));
  return d;
}

std::string ensemble_name(const std::vector<std::string>& members) {
  std::string out;
  for (const auto& m : members) {
    if (!out.empty()) out += '+';
    out += m;
  }
  return out;
}

std::vector<std::string> ensemble_members(const std::string& name) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto plus = name.find('+', start);
    out.push_back(name.substr(start, plus - start));
    if (plus == std::string::npos) break;
    start = plus + 1;
  }
  for (const auto& m : out) {
    if (m != "dc" && m != "dc-single" && m != "gbdt") {
      throw ConfigError("unknown annotator '" + m + "' in ensemble '" + name + "'");
    }
  }
  return out;
}

namespace {

std::string rho_tag(double rho) { return tsv::format_double(rho); }

}  // namespace

Experiment::Experiment(const RunConfig& config, const PreparedData& data, std::uint64_t seed,
                       double rho)
    : config_(config), data_(data), seed_(seed), rho_(rho) {
  auto [train, val] = split_labeled(data.labeled, config.validation_fraction,
                                    derive_seed(seed, "split"));
  train_ = rho == 1.0 ? std::move(train) : subsample(train, rho, derive_seed(seed, "subsample"));
  validation_samples_ = std::move(val);
  train_encoded_ = encode_all<LabeledSample>(train_, data.vocab, config.limits);
  validation_encoded_ = encode_all<LabeledSample>(validation_samples_, data.vocab, config.limits);
  for (const auto& s : train_) {
    train_binary_.push_back(main_label(s.label));
    train_labels_.push_back(s.label);
  }
  validation_.pairs = validation_encoded_;
  for (const auto& s : validation_samples_) validation_.labels.push_back(main_label(s.label));
}

std::uint64_t Experiment::component_seed(const std::string& component) const {
  return derive_seed(seed_, component + "@rho=" + rho_tag(rho_));
}

void Experiment::record(const std::string& component, TrainHistory h) {
  histories_[component] = std::move(h);
}

const TrainHistory* Experiment::history(const std::string& component) const {
  auto it = histories_.find(component);
  return it == histories_.end() ? nullptr : &it->second;
}

Annotator& Experiment::annotator(const std::string& id) {
  if (auto it = annotators_.find(id); it != annotators_.end()) return *it->second;
  AnnotatorConfig ac = config_.annotator;
  AnnotatorKind kind = AnnotatorKind::dc;
  if (id == "dc-single") {
    ac.multi_task = false;
  } else if (id == "gbdt") {
    kind = AnnotatorKind::gbdt;
  } else if (id != "dc") {
    throw ConfigError("unknown annotator '" + id + "'");
  }
  const std::string component = "annotator:" + id;
  ac.train.seed = component_seed(component);
  TrainHistory h;
  auto a = train_annotator(kind, train_encoded_, train_labels_, validation_,
                           data_.vocab.size(), ac, &h);
  record(component, std::move(h));
  return *annotators_.emplace(id, std::move(a)).first->second;
}

namespace {

std::vector<Annotator*> members_of(Experiment& e, const std::string& ensemble) {
  std::vector<Annotator*> out;
  for (const auto& m : ensemble_members(ensemble)) out.push_back(&e.annotator(m));
  return out;
}

}  // namespace

const std::vector<double>& Experiment::unlabeled_scores(const std::string& ensemble) {
  if (auto it = unlabeled_scores_.find(ensemble); it != unlabeled_scores_.end()) return it->second;
  auto members = members_of(*this, ensemble);
  return unlabeled_scores_[ensemble] = ensemble_scores(members, data_.unlabeled_encoded);
}

const std::vector<double>& Experiment::train_scores(const std::string& ensemble) {
  if (auto it = train_scores_.find(ensemble); it != train_scores_.end()) return it->second;
  auto members = members_of(*this, ensemble);
  return train_scores_[ensemble] = ensemble_scores(members, train_encoded_);
}

CdssmModel& Experiment::student(const std::string& ensemble, const MappingConfig& mapping) {
  const std::string component = "student:" + ensemble + ":" + mapping.name();
  if (auto it = models_.find(component); it != models_.end()) return *it->second;
  StudentConfig sc = config_.student;
  sc.mapping = mapping;
  sc.train.seed = component_seed(component);
  const auto& scores = unlabeled_scores(ensemble);
  TrainHistory h;
  auto m = std::make_unique<CdssmModel>(
      train_student(data_.vocab.size(), data_.unlabeled_encoded, scores, sc, validation_, &h));
  record(component, std::move(h));
  return *models_.emplace(component, std::move(m)).first->second;
}

CdssmModel& Experiment::finetuned(const std::string& ensemble, const MappingConfig& mapping,
                                  const FinetuneConfig& finetune) {
  std::string component = "ft:" + ensemble + ":" + mapping.name() + ":" +
                          finetune_mode_name(finetune.mode);
  if (finetune.mode == FinetuneMode::label_aware) {
    component += ":theta=" + tsv::format_double(finetune.theta);
  }
  if (auto it = models_.find(component); it != models_.end()) return *it->second;
  CdssmModel& base = student(ensemble, mapping);
  const auto& s = train_scores(ensemble);
  std::vector<double> targets;
  targets.reserve(s.size());
  for (double v : s) targets.push_back(map_target(v, mapping));
  FinetuneConfig fc = finetune;
  fc.train.seed = component_seed(component);
  TrainHistory h;
  auto m = std::make_unique<CdssmModel>(
      weakmatch::finetune(base, train_encoded_, targets, train_binary_, fc, validation_, &h));
  record(component, std::move(h));
  return *models_.emplace(component, std::move(m)).first->second;
}

CdssmModel& Experiment::labeled_baseline() {
  const std::string component = "cdssm-labeled";
  if (auto it = models_.find(component); it != models_.end()) return *it->second;
  TrainConfig tc = config_.labeled_baseline;
  tc.seed = component_seed(component);
  TrainHistory h;
  auto m = std::make_unique<CdssmModel>(train_labeled_baseline(
      data_.vocab.size(), train_encoded_, train_binary_, config_.student.cdssm, tc, validation_,
      &h));
  record(component, std::move(h));
  return *models_.emplace(component, std::move(m)).first->second;
}

CdssmModel& Experiment::click_baseline() {
  const std::string component = "cdssm-click";
  if (auto it = models_.find(component); it != models_.end()) return *it->second;
  TrainConfig tc = config_.click_baseline;
  tc.seed = component_seed(component);
  TrainHistory h;
  auto m = std::make_unique<CdssmModel>(train_click_baseline(
      data_.vocab.size(), data_.clicked_encoded, config_.student.cdssm, tc, validation_, &h));
  record(component, std::move(h));
  return *models_.emplace(component, std::move(m)).first->second;
}

MetricsReport Experiment::evaluate(const std::string& name, std::span<const double> scores) const {
  MetricsReport r = weakmatch::evaluate(name, scores, data_.test_labels);
  r.seed = seed_;
  r.config_hash = config_.hash();
  r.sizes["labeled_train"] = train_.size();
  r.sizes["validation"] = validation_samples_.size();
  r.sizes["unlabeled"] = data_.unlabeled.size();
  r.tags["rho"] = rho_tag(rho_);
  return r;
}

MetricsReport Experiment::evaluate_model(const std::string& name, CdssmModel& model) const {
  return evaluate(name, model.score_pairs(data_.test_encoded));
}

MetricsReport Experiment::evaluate_annotators(const std::string& ensemble) {
  auto members = members_of(*this, ensemble);
  return evaluate("annotator:" + ensemble, ensemble_scores(members, data_.test_encoded));
}

ExperimentSet::ExperimentSet(RunConfig config, const PreparedData& data)
    : config_(std::move(config)), data_(data) {
  config_.validate();
}

Experiment& ExperimentSet::get(std::uint64_t seed, double rho) {
  auto& slot = cells_[{seed, rho}];
  if (!slot) slot = std::make_unique<Experiment>(config_, data_, seed, rho);
  return *slot;
}

void write_run_config(const std::filesystem::path& dir, const RunConfig& config) {
  auto out = tsv::open_out(dir / "config.json");
  nlohmann::json j = {{"config", config.to_json()}, {"config_hash", config.hash()}};
  out << j.dump(2) << '\n';
}

namespace {

void write_report_lines(const std::filesystem::path& path,
                        const std::vector<MetricsReport>& reports) {
  auto out = tsv::open_out(path);
  for (const auto& r : reports) out << r.to_json().dump() << '\n';
}

std::string default_ensemble(const RunConfig& config) {
  std::vector<std::string> names;
  for (auto k : config.annotators) names.push_back(annotator_kind_name(k));
  return ensemble_name(names);
}

}  // namespace

PipelineArtifacts run_pipeline(const RunConfig& config) {
  config.validate();
  PipelineArtifacts art;
  art.run_dir = config.artifact_dir;
  const auto& dir = art.run_dir;
  write_run_config(dir, config);
  art.files.push_back(dir / "config.json");

  Corpus corpus = generate_corpus(config.corpus);
  save_labeled(dir / "data" / "labeled.tsv", corpus.labeled);
  save_labeled(dir / "data" / "test.tsv", corpus.test);
  save_unlabeled(dir / "data" / "unlabeled.tsv", corpus.unlabeled, DatasetKind::unlabeled);
  const PreparedData data = prepare_data(std::move(corpus), config.limits);
  data.vocab.save(dir / "vocab.tsv");
  const std::string vocab_path = (dir / "vocab.tsv").string();
  const std::string hash = config.hash();

  Experiment e(config, data, config.seed);
  const std::string ensemble = default_ensemble(config);
  std::vector<MetricsReport> reports;
  for (auto kind : config.annotators) {
    const std::string id = annotator_kind_name(kind);
    Annotator& a = e.annotator(id);
    const auto path = dir / "checkpoints" / ("annotator-" + id + (kind == AnnotatorKind::dc ? ".ckpt" : ".gbdt"));
    a.save(path, vocab_path, hash);
    art.files.push_back(path);
    reports.push_back(e.evaluate("annotator:" + id, a.score(data.test_encoded)));
  }
  if (config.annotators.size() > 1) reports.push_back(e.evaluate_annotators(ensemble));

  std::vector<Annotator*> members;
  for (auto kind : config.annotators) members.push_back(&e.annotator(annotator_kind_name(kind)));
  const auto scored_unlabeled = score_dataset(members, std::span<const UnlabeledPair>(data.unlabeled),
                                              data.unlabeled_encoded);
  const auto scored_train = score_dataset(members, std::span<const LabeledSample>(e.train()),
                                          e.train_encoded());
  save_scored(dir / "scored" / "unlabeled.tsv", scored_unlabeled);
  save_scored(dir / "scored" / "labeled_train.tsv", scored_train);
  art.files.push_back(dir / "scored" / "unlabeled.tsv");
  art.files.push_back(dir / "scored" / "labeled_train.tsv");

  auto save_model = [&](CdssmModel& m, const std::string& name) {
    auto ckpt = m.to_checkpoint();
    ckpt.vocab_path = vocab_path;
    ckpt.config_hash = hash;
    const auto path = dir / "checkpoints" / (name + ".ckpt");
    nn::save_checkpoint(path, ckpt);
    art.files.push_back(path);
  };
  CdssmModel& student = e.student(ensemble, config.student.mapping);
  save_model(student, "student");
  reports.push_back(e.evaluate_model("student:" + ensemble, student));
  CdssmModel& tuned = e.finetuned(ensemble, config.student.mapping, config.finetune);
  save_model(tuned, "finetuned");
  art.report = e.evaluate_model("ft:" + ensemble, tuned);
  reports.push_back(art.report);

  write_report_lines(dir / "reports" / "pipeline.jsonl", reports);
  {
    auto out = tsv::open_out(dir / "reports" / "metrics.json");
    out << art.report.to_json().dump(2) << '\n';
  }
  art.files.push_back(dir / "reports" / "pipeline.jsonl");
  art.files.push_back(dir / "reports" / "metrics.json");
  return art;
}

}  // namespace weakmatch
