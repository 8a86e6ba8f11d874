// Command-line entry point: data generation, training stages, evaluation,
// protocols and the retrieval demo. Every subcommand resolves a RunConfig
// (defaults, then --config, then environment, then flags) and writes its
// outputs under the artifact directory.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "weakmatch/annotate.hpp"
#include "weakmatch/config.hpp"
#include "weakmatch/distill.hpp"
#include "weakmatch/error.hpp"
#include "weakmatch/metrics.hpp"
#include "weakmatch/pipeline.hpp"
#include "weakmatch/protocols.hpp"
#include "weakmatch/retrieval.hpp"
#include "weakmatch/rng.hpp"

namespace fs = std::filesystem;
using namespace weakmatch;

namespace {

constexpr int kExitUsage = 2;

struct CommonOptions {
  std::string config_path;
  std::string artifact_dir;
  std::optional<std::uint64_t> seed;
};

RunConfig resolve(const CommonOptions& opt) {
  RunConfig c = opt.config_path.empty() ? RunConfig{} : load_run_config(opt.config_path);
  apply_env_overrides(c);
  if (!opt.artifact_dir.empty()) c.artifact_dir = opt.artifact_dir;
  if (opt.seed) c.seed = *opt.seed;
  c.validate();
  return c;
}

void add_common(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--config", opt.config_path, "JSON run configuration");
  cmd->add_option("--artifact-dir", opt.artifact_dir, "Run directory for all outputs");
  cmd->add_option("--seed", opt.seed, "Global seed");
}

void require_file(const fs::path& p, const char* what) {
  if (!fs::exists(p)) {
    throw ConfigError(std::string("missing ") + what + ": " + p.string() +
                      " (run gen-data first or pass the path explicitly)");
  }
}

fs::path run_dir(const RunConfig& c) { return c.artifact_dir; }
fs::path data_path(const RunConfig& c, const char* name) {
  return run_dir(c) / "data" / name;
}

TrigramVocab load_vocab(const RunConfig& c, const std::string& override_path) {
  const fs::path p = override_path.empty() ? run_dir(c) / "vocab.tsv" : fs::path(override_path);
  require_file(p, "vocab");
  return TrigramVocab::load(p);
}

struct LabeledSplit {
  std::vector<LabeledSample> samples;
  std::vector<EncodedPair> encoded;
  std::vector<int> binary;
};

LabeledSplit load_split(const fs::path& p, const TrigramVocab& vocab, const RunConfig& c) {
  require_file(p, "labeled split");
  LabeledSplit s;
  s.samples = load_labeled(p);
  s.encoded = encode_all<LabeledSample>(s.samples, vocab, c.limits);
  for (const auto& x : s.samples) s.binary.push_back(main_label(x.label));
  return s;
}

ValidationSet as_validation(const LabeledSplit& s) { return {s.encoded, s.binary}; }

void log_history(const char* what, const TrainHistory& h) {
  for (const auto& e : h.epochs) {
    std::fprintf(stderr, "%s epoch %zu loss %.6f val_roc_auc %.6f\n", what, e.epoch, e.train_loss,
                 e.val_roc_auc);
  }
  std::fprintf(stderr, "%s best epoch %zu val_roc_auc %.6f\n", what, h.best_epoch,
               h.best_val_roc_auc);
}

void save_cdssm(CdssmModel& m, const fs::path& path, const RunConfig& c) {
  auto ckpt = m.to_checkpoint();
  ckpt.vocab_path = (run_dir(c) / "vocab.tsv").string();
  ckpt.config_hash = c.hash();
  nn::save_checkpoint(path, ckpt);
  std::printf("%s\n", path.string().c_str());
}

std::vector<double> scores_of(const std::vector<ScoredSample>& s) {
  std::vector<double> out;
  for (const auto& x : s) out.push_back(x.s);
  return out;
}

std::vector<EncodedPair> encode_scored(const std::vector<ScoredSample>& s,
                                       const TrigramVocab& vocab, const RunConfig& c) {
  std::vector<EncodedPair> out;
  out.reserve(s.size());
  for (const auto& x : s) out.push_back(encode_pair(x.query, x.listing, vocab, c.limits));
  return out;
}

// ---- subcommands -----------------------------------------------------------

void cmd_gen_data(const RunConfig& c) {
  write_run_config(run_dir(c), c);
  Corpus corpus = generate_corpus(c.corpus);
  save_labeled(data_path(c, "labeled.tsv"), corpus.labeled);
  save_labeled(data_path(c, "test.tsv"), corpus.test);
  save_unlabeled(data_path(c, "unlabeled.tsv"), corpus.unlabeled, DatasetKind::unlabeled);
  save_unlabeled(data_path(c, "clicked.tsv"), corpus.clicked, DatasetKind::clicked);
  auto [train, val] = split_labeled(corpus.labeled, c.validation_fraction,
                                    derive_seed(c.seed, "split"));
  save_labeled(data_path(c, "labeled_train.tsv"), train);
  save_labeled(data_path(c, "labeled_val.tsv"), val);
  std::vector<std::string> texts;
  collect_texts<LabeledSample>(corpus.labeled, texts);
  collect_texts<UnlabeledPair>(corpus.unlabeled, texts);
  collect_texts<UnlabeledPair>(corpus.clicked, texts);
  TrigramVocab::build(texts).save(run_dir(c) / "vocab.tsv");
  std::printf("%s\n", (run_dir(c) / "data").string().c_str());
}

void cmd_train_annotator(const RunConfig& c, const std::string& kind_name, bool single_task,
                         const std::string& vocab_path, std::string out) {
  const auto kind = parse_annotator_kind(kind_name);
  const auto vocab = load_vocab(c, vocab_path);
  const auto train = load_split(data_path(c, "labeled_train.tsv"), vocab, c);
  const auto val = load_split(data_path(c, "labeled_val.tsv"), vocab, c);
  std::vector<GradedLabel> labels;
  for (const auto& s : train.samples) labels.push_back(s.label);
  AnnotatorConfig ac = c.annotator;
  if (single_task) ac.multi_task = false;
  const std::string id = std::string(annotator_kind_name(kind)) + (single_task ? "-single" : "");
  ac.train.seed = derive_seed(c.seed, "annotator:" + id + "@rho=1");
  TrainHistory h;
  auto a = train_annotator(kind, train.encoded, labels, as_validation(val), vocab.size(), ac, &h);
  if (kind == AnnotatorKind::dc) log_history("annotator", h);
  if (out.empty()) {
    out = (run_dir(c) / "checkpoints" /
           ("annotator-" + id + (kind == AnnotatorKind::dc ? ".ckpt" : ".gbdt")))
              .string();
  }
  a->save(out, (run_dir(c) / "vocab.tsv").string(), c.hash());
  std::printf("%s\n", out.c_str());
}

void cmd_score(const RunConfig& c, const std::vector<std::string>& annotator_paths,
               const std::string& input, const std::string& kind_name,
               const std::string& vocab_path, std::string out) {
  if (annotator_paths.empty()) throw ConfigError("score: at least one --annotator required");
  const auto kind = parse_dataset_kind(kind_name);
  const auto vocab = load_vocab(c, vocab_path);
  std::vector<std::unique_ptr<Annotator>> owned;
  std::vector<Annotator*> annotators;
  for (const auto& p : annotator_paths) {
    require_file(p, "annotator checkpoint");
    owned.push_back(load_annotator(p));
    annotators.push_back(owned.back().get());
  }
  require_file(input, "input dataset");
  std::vector<ScoredSample> scored;
  if (kind == DatasetKind::labeled) {
    const auto samples = load_labeled(input);
    scored = score_dataset(annotators, std::span<const LabeledSample>(samples),
                           encode_all<LabeledSample>(samples, vocab, c.limits));
  } else {
    const auto pairs = load_unlabeled(input, kind);
    scored = score_dataset(annotators, std::span<const UnlabeledPair>(pairs),
                           encode_all<UnlabeledPair>(pairs, vocab, c.limits));
  }
  if (out.empty()) out = (run_dir(c) / "scored" / fs::path(input).filename()).string();
  save_scored(out, scored);
  std::printf("%s\n", out.c_str());
}

void cmd_train_student(const RunConfig& c, const std::string& scored_path,
                       const std::string& mapping, const std::string& vocab_path,
                       std::string out) {
  const auto vocab = load_vocab(c, vocab_path);
  require_file(scored_path, "scored dataset");
  const auto scored = load_scored(scored_path);
  const auto val = load_split(data_path(c, "labeled_val.tsv"), vocab, c);
  StudentConfig sc = c.student;
  if (!mapping.empty()) {
    const auto m = MappingConfig::parse(mapping);
    sc.mapping.target = m.target;
    sc.mapping.weight = m.weight;
  }
  sc.train.seed = derive_seed(c.seed, "student:" + sc.mapping.name());
  TrainHistory h;
  auto model = train_student(vocab.size(), encode_scored(scored, vocab, c), scores_of(scored), sc,
                             as_validation(val), &h);
  log_history("student", h);
  if (out.empty()) out = (run_dir(c) / "checkpoints" / "student.ckpt").string();
  save_cdssm(model, out, c);
}

void cmd_finetune(const RunConfig& c, const std::string& student_path,
                  const std::string& scored_path, std::optional<double> theta,
                  const std::string& mode, const std::string& vocab_path, std::string out) {
  const auto vocab = load_vocab(c, vocab_path);
  require_file(student_path, "student checkpoint");
  require_file(scored_path, "scored labeled dataset");
  auto student = CdssmModel::from_checkpoint(nn::load_checkpoint(student_path));
  const auto scored = load_scored(scored_path);
  std::vector<double> targets;
  std::vector<int> binary;
  for (const auto& s : scored) {
    if (!s.binary_label) throw FormatError(scored_path + ": fine-tuning needs a labeled scored set");
    targets.push_back(map_target(s.s, c.student.mapping));
    binary.push_back(*s.binary_label);
  }
  const auto val = load_split(data_path(c, "labeled_val.tsv"), vocab, c);
  FinetuneConfig fc = c.finetune;
  if (!mode.empty()) fc.mode = parse_finetune_mode(mode);
  if (theta) fc.theta = *theta;
  fc.train.seed = derive_seed(c.seed, std::string("ft:") + finetune_mode_name(fc.mode));
  TrainHistory h;
  auto tuned = finetune(std::move(student), encode_scored(scored, vocab, c), targets, binary, fc,
                        as_validation(val), &h);
  log_history("finetune", h);
  if (out.empty()) out = (run_dir(c) / "checkpoints" / "finetuned.ckpt").string();
  save_cdssm(tuned, out, c);
}

void cmd_eval(const RunConfig& c, const std::string& model_path, std::string test_path,
              const std::string& vocab_path, std::string name, bool timing) {
  const auto start = std::chrono::steady_clock::now();
  const auto vocab = load_vocab(c, vocab_path);
  if (test_path.empty()) test_path = data_path(c, "test.tsv").string();
  const auto test = load_split(test_path, vocab, c);
  require_file(model_path, "model checkpoint");
  std::vector<double> scores;
  std::ifstream probe(model_path, std::ios::binary);
  char magic[8] = {};
  probe.read(magic, sizeof magic);
  probe.close();
  bool is_cdssm = false;
  if (std::string_view(magic, 8) == "WMCKPT01") {
    const auto ckpt = nn::load_checkpoint(model_path);
    is_cdssm = ckpt.architecture.value("kind", "") == "cdssm";
    if (is_cdssm) scores = CdssmModel::from_checkpoint(ckpt).score_pairs(test.encoded);
  }
  if (!is_cdssm) scores = load_annotator(model_path)->score(test.encoded);
  if (name.empty()) name = fs::path(model_path).stem().string();
  auto report = evaluate(name, scores, test.binary);
  report.seed = c.seed;
  report.config_hash = c.hash();
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto out = run_dir(c) / "reports" / ("eval-" + name + ".json");
  fs::create_directories(out.parent_path());
  std::ofstream(out) << report.to_json(timing).dump(2) << '\n';
  std::printf("%s\n", report.to_json(timing).dump().c_str());
}

void cmd_sweep(const RunConfig& c, const std::vector<std::string>& protocols) {
  write_run_config(run_dir(c), c);
  const PreparedData data = prepare_data(generate_corpus(c.corpus), c.limits);
  ExperimentSet set(c, data);
  for (const auto& name : protocols) {
    const auto out = run_protocol(parse_protocol(name), set);
    write_protocol(out, run_dir(c) / "reports");
    for (const auto& s : out.series) std::printf("%s\n", s.render_table().c_str());
  }
}

void cmd_recall(const RunConfig& c, const std::string& model_path, const std::string& query,
                std::size_t k, std::string ads_path, const std::string& dict_path,
                const std::string& vocab_path) {
  const auto vocab = load_vocab(c, vocab_path);
  require_file(model_path, "student checkpoint");
  auto model = CdssmModel::from_checkpoint(nn::load_checkpoint(model_path));
  VectorDictionary dict;
  std::vector<AdListing> ads;
  if (ads_path.empty()) ads_path = data_path(c, "unlabeled.tsv").string();
  require_file(ads_path, "ad listings");
  for (const auto& p : load_unlabeled(ads_path, DatasetKind::unlabeled)) ads.push_back(p.listing);
  if (!dict_path.empty() && fs::exists(dict_path)) {
    dict = load_dictionary(dict_path);
    if (dict.model_fingerprint != model.fingerprint() ||
        dict.vocab_fingerprint != vocab.fingerprint()) {
      throw ConfigError("dictionary " + dict_path + " was built with a different model or vocab");
    }
  } else {
    std::vector<std::uint64_t> ids(ads.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
    dict = build_dictionary(model, vocab, ads, ids, c.limits);
    if (!dict_path.empty()) save_dictionary(dict_path, dict);
  }
  if (dict.size() == 0) throw ConfigError("recall: empty dictionary");
  const auto q = encode_query(model, vocab, normalize_text(query), c.limits);
  for (const auto& hit : top_k(dict, q, k)) {
    const std::string listing = hit.id < ads.size()
                                    ? ads[hit.id].keyword + " | " + ads[hit.id].ad_title
                                    : std::string();
    std::printf("%llu\t%.12f\t%s\n", static_cast<unsigned long long>(hit.id), hit.score,
                listing.c_str());
  }
}

void cmd_pipeline(const RunConfig& c) {
  const auto art = run_pipeline(c);
  for (const auto& f : art.files) std::printf("%s\n", f.string().c_str());
  std::printf("%s\n", art.report.to_json().dump().c_str());
}

int report_error(const char* category, const std::string& message, int code) {
  std::cerr << nlohmann::json{{"error", category}, {"message", message}}.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weakmatch: train fast matching models from weak annotations"};
  app.require_subcommand(1);

  CommonOptions common;
  std::string vocab_path;
  std::string out;

  auto* gen = app.add_subcommand("gen-data", "Generate the synthetic corpus and splits");
  add_common(gen, common);

  std::string kind = "dc";
  bool single_task = false;
  auto* ta = app.add_subcommand("train-annotator", "Train a DC or GBDT annotator");
  add_common(ta, common);
  ta->add_option("--kind", kind, "dc or gbdt")->check(CLI::IsMember({"dc", "gbdt"}));
  ta->add_flag("--single-task", single_task, "Main task only (DC)");
  ta->add_option("--vocab", vocab_path);
  ta->add_option("--out", out);

  std::vector<std::string> annotators;
  std::string input;
  std::string dataset_kind = "unlabeled";
  auto* sc = app.add_subcommand("score", "Score a dataset with the mean of annotators");
  add_common(sc, common);
  sc->add_option("--annotator", annotators, "Annotator checkpoint (repeatable)")->required();
  sc->add_option("--input", input, "Dataset TSV")->required();
  sc->add_option("--kind", dataset_kind, "labeled, unlabeled or clicked")
      ->check(CLI::IsMember({"labeled", "unlabeled", "clicked"}));
  sc->add_option("--vocab", vocab_path);
  sc->add_option("--out", out);

  std::string scored;
  std::string mapping;
  auto* ts = app.add_subcommand("train-student", "Train the CDSSM student on scored pairs");
  add_common(ts, common);
  ts->add_option("--scored", scored, "Scored unlabeled TSV")->required();
  ts->add_option("--mapping", mapping, "Target and weight functions, e.g. f2:g3");
  ts->add_option("--vocab", vocab_path);
  ts->add_option("--out", out);

  std::string student;
  std::optional<double> theta;
  std::string mode;
  auto* ft = app.add_subcommand("finetune", "Fine-tune a student on scored labeled pairs");
  add_common(ft, common);
  ft->add_option("--student", student, "Student checkpoint")->required();
  ft->add_option("--scored", scored, "Scored labeled training TSV")->required();
  ft->add_option("--theta", theta, "Label-aware theta in [0,1]");
  ft->add_option("--mode", mode, "hard, soft or label-aware")
      ->check(CLI::IsMember({"hard", "soft", "label-aware"}));
  ft->add_option("--vocab", vocab_path);
  ft->add_option("--out", out);

  std::string model;
  std::string test;
  std::string name;
  bool timing = false;
  auto* ev = app.add_subcommand("eval", "ROC/PR AUC of a checkpoint on a labeled set");
  add_common(ev, common);
  ev->add_option("--model", model, "CDSSM or annotator checkpoint")->required();
  ev->add_option("--test", test, "Labeled TSV (default: the run's test set)");
  ev->add_option("--name", name, "Report name");
  ev->add_flag("--timing", timing, "Include wall-clock time in the report");
  ev->add_option("--vocab", vocab_path);

  std::vector<std::string> protocols;
  auto* sw = app.add_subcommand("sweep", "Run evaluation protocols over the configured seeds");
  add_common(sw, common);
  sw->add_option("--protocol", protocols, "baselines, mapping-grid, theta-sweep, rho-sweep")
      ->required()
      ->check(CLI::IsMember({"baselines", "mapping-grid", "theta-sweep", "rho-sweep"}));

  std::string query;
  std::size_t k = 10;
  std::string ads;
  std::string dict;
  auto* rc = app.add_subcommand("recall", "Top-k ads for a query from precomputed ad vectors");
  add_common(rc, common);
  rc->add_option("--model", model, "Student checkpoint")->required();
  rc->add_option("--query", query, "Query text")->required();
  rc->add_option("--k", k, "Number of results")->check(CLI::PositiveNumber);
  rc->add_option("--ads", ads, "Unlabeled TSV whose listings form the dictionary");
  rc->add_option("--dict", dict, "Dictionary file to load, or to write if absent");
  rc->add_option("--vocab", vocab_path);

  auto* pl = app.add_subcommand("pipeline", "Annotate, score, train and fine-tune in one run");
  add_common(pl, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), kExitUsage);
  }

  try {
    const RunConfig c = resolve(common);
    if (*gen) cmd_gen_data(c);
    if (*ta) cmd_train_annotator(c, kind, single_task, vocab_path, out);
    if (*sc) cmd_score(c, annotators, input, dataset_kind, vocab_path, out);
    if (*ts) cmd_train_student(c, scored, mapping, vocab_path, out);
    if (*ft) cmd_finetune(c, student, scored, theta, mode, vocab_path, out);
    if (*ev) cmd_eval(c, model, test, vocab_path, name, timing);
    if (*sw) cmd_sweep(c, protocols);
    if (*rc) cmd_recall(c, model, query, k, ads, dict, vocab_path);
    if (*pl) cmd_pipeline(c);
  } catch (const Error& e) {
    return report_error(category_name(e.category()), e.what(), exit_code(e.category()));
  } catch (const std::exception& e) {
    return report_error("runtime", e.what(), exit_code(ErrorCategory::runtime));
  }
  return 0;
}
