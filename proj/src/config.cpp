#include "weakmatch/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>

#include "weakmatch/error.hpp"
#include "weakmatch/rng.hpp"

namespace weakmatch {

namespace {

using nlohmann::json;

json train_json(const TrainConfig& t) {
  return {{"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"learning_rate", t.learning_rate},
          {"momentum", t.momentum},
          {"patience", t.patience}};
}

TrainConfig train_from(const json& j) {
  TrainConfig t;
  t.epochs = j.at("epochs").get<std::size_t>();
  t.batch_size = j.at("batch_size").get<std::size_t>();
  t.learning_rate = j.at("learning_rate").get<double>();
  t.momentum = j.at("momentum").get<double>();
  t.patience = j.at("patience").get<std::size_t>();
  return t;
}

// Every key of `given` must exist in `defaults` with a compatible type.
void check_keys(const json& given, const json& defaults, const std::string& where) {
  if (!given.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : given.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!defaults.contains(key)) throw ConfigError("unknown config key '" + path + "'");
    const json& d = defaults.at(key);
    if (d.is_object()) {
      check_keys(value, d, path);
      continue;
    }
    const bool ok = d.is_number() ? value.is_number()
                    : d.is_boolean() ? value.is_boolean()
                    : d.is_string()  ? value.is_string()
                    : d.is_array()   ? value.is_array()
                                     : true;
    if (!ok) throw ConfigError("config key '" + path + "' has the wrong type");
    if (d.is_number_unsigned() && !(value.is_number_unsigned() ||
                                    (value.is_number_integer() && value.get<std::int64_t>() >= 0))) {
      throw ConfigError("config key '" + path + "' must be a non-negative integer");
    }
  }
}

}  // namespace

void RunConfig::validate() const {
  corpus.validate();
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction must be in (0,1)");
  }
  if (annotators.empty()) throw ConfigError("annotators: at least one annotator required");
  if (limits.query == 0 || limits.keyword == 0 || limits.ad_title == 0 || limits.lp_title == 0) {
    throw ConfigError("features: field limits must be positive");
  }
  annotator.train.validate();
  (void)annotator.task_set();
  student.mapping.validate();
  student.train.validate();
  finetune.validate();
  labeled_baseline.validate();
  click_baseline.validate();
  if (protocol.seeds.empty()) throw ConfigError("protocol.seeds must not be empty");
  for (double t : protocol.thetas) {
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("protocol.thetas must lie in [0,1]");
  }
  for (double r : protocol.rhos) {
    if (!(r > 0.0 && r <= 1.0)) throw ConfigError("protocol.rhos must lie in (0,1]");
  }
  for (const auto& m : protocol.mappings) MappingConfig::parse(m);
}

json RunConfig::to_json() const {
  std::vector<std::string> ann;
  for (auto k : annotators) ann.push_back(annotator_kind_name(k));
  std::vector<std::string> label_sets;
  for (auto s : annotator.label_sets) label_sets.push_back(label_set_name(s));
  return {
      {"seed", seed},
      {"artifact_dir", artifact_dir},
      {"corpus",
       {{"n_intents", corpus.n_intents},
        {"vocab_size", corpus.vocab_size},
        {"n_labeled", corpus.n_labeled},
        {"n_unlabeled", corpus.n_unlabeled},
        {"n_clicked", corpus.n_clicked},
        {"n_test", corpus.n_test},
        {"click_noise_rate", corpus.click_noise_rate},
        {"seed", corpus.seed}}},
      {"validation_fraction", validation_fraction},
      {"features",
       {{"query", limits.query},
        {"keyword", limits.keyword},
        {"ad_title", limits.ad_title},
        {"lp_title", limits.lp_title}}},
      {"annotators", ann},
      {"annotator",
       {{"dc",
         {{"embedding_dim", annotator.dc.embedding_dim},
          {"residual_units", annotator.dc.residual_units},
          {"batchnorm", annotator.dc.batchnorm}}},
        {"multi_task", annotator.multi_task},
        {"label_sets", label_sets},
        {"train", train_json(annotator.train)},
        {"gbdt",
         {{"n_trees", annotator.gbdt.n_trees},
          {"max_depth", annotator.gbdt.max_depth},
          {"shrinkage", annotator.gbdt.shrinkage},
          {"min_samples_leaf", annotator.gbdt.min_samples_leaf},
          {"l2", annotator.gbdt.l2}}}}},
      {"student",
       {{"conv_channels", student.cdssm.conv_channels},
        {"semantic_dim", student.cdssm.semantic_dim},
        {"mapping", student.mapping.name()},
        {"t1", student.mapping.t1},
        {"t2", student.mapping.t2},
        {"p", student.mapping.p},
        {"train", train_json(student.train)}}},
      {"finetune",
       {{"mode", finetune_mode_name(finetune.mode)},
        {"theta", finetune.theta},
        {"train", train_json(finetune.train)}}},
      {"labeled_baseline", train_json(labeled_baseline)},
      {"click_baseline", train_json(click_baseline)},
      {"protocol",
       {{"seeds", protocol.seeds},
        {"thetas", protocol.thetas},
        {"rhos", protocol.rhos},
        {"mappings", protocol.mappings}}},
  };
}

RunConfig RunConfig::from_json(const json& given) {
  const RunConfig defaults;
  json j = defaults.to_json();
  check_keys(given, j, "");
  j.merge_patch(given);
  RunConfig c;
  try {
    c.seed = j.at("seed").get<std::uint64_t>();
    c.artifact_dir = j.at("artifact_dir").get<std::string>();
    const auto& co = j.at("corpus");
    c.corpus.n_intents = co.at("n_intents").get<std::size_t>();
    c.corpus.vocab_size = co.at("vocab_size").get<std::size_t>();
    c.corpus.n_labeled = co.at("n_labeled").get<std::size_t>();
    c.corpus.n_unlabeled = co.at("n_unlabeled").get<std::size_t>();
    c.corpus.n_clicked = co.at("n_clicked").get<std::size_t>();
    c.corpus.n_test = co.at("n_test").get<std::size_t>();
    c.corpus.click_noise_rate = co.at("click_noise_rate").get<double>();
    c.corpus.seed = co.at("seed").get<std::uint64_t>();
    c.validation_fraction = j.at("validation_fraction").get<double>();
    const auto& fe = j.at("features");
    c.limits = {fe.at("query").get<std::size_t>(), fe.at("keyword").get<std::size_t>(),
                fe.at("ad_title").get<std::size_t>(), fe.at("lp_title").get<std::size_t>()};
    c.annotators.clear();
    for (const auto& a : j.at("annotators")) {
      c.annotators.push_back(parse_annotator_kind(a.get<std::string>()));
    }
    const auto& an = j.at("annotator");
    c.annotator.dc.embedding_dim = an.at("dc").at("embedding_dim").get<std::size_t>();
    c.annotator.dc.residual_units = an.at("dc").at("residual_units").get<std::size_t>();
    c.annotator.dc.batchnorm = an.at("dc").at("batchnorm").get<bool>();
    c.annotator.multi_task = an.at("multi_task").get<bool>();
    c.annotator.label_sets.clear();
    for (const auto& s : an.at("label_sets")) {
      c.annotator.label_sets.push_back(parse_label_set(s.get<std::string>()));
    }
    c.annotator.train = train_from(an.at("train"));
    const auto& gb = an.at("gbdt");
    c.annotator.gbdt.n_trees = gb.at("n_trees").get<std::size_t>();
    c.annotator.gbdt.max_depth = gb.at("max_depth").get<std::size_t>();
    c.annotator.gbdt.shrinkage = gb.at("shrinkage").get<double>();
    c.annotator.gbdt.min_samples_leaf = gb.at("min_samples_leaf").get<std::size_t>();
    c.annotator.gbdt.l2 = gb.at("l2").get<double>();
    const auto& st = j.at("student");
    c.student.cdssm.conv_channels = st.at("conv_channels").get<std::size_t>();
    c.student.cdssm.semantic_dim = st.at("semantic_dim").get<std::size_t>();
    c.student.mapping = MappingConfig::parse(st.at("mapping").get<std::string>());
    c.student.mapping.t1 = st.at("t1").get<double>();
    c.student.mapping.t2 = st.at("t2").get<double>();
    c.student.mapping.p = st.at("p").get<double>();
    c.student.train = train_from(st.at("train"));
    const auto& ft = j.at("finetune");
    c.finetune.mode = parse_finetune_mode(ft.at("mode").get<std::string>());
    c.finetune.theta = ft.at("theta").get<double>();
    c.finetune.train = train_from(ft.at("train"));
    c.labeled_baseline = train_from(j.at("labeled_baseline"));
    c.click_baseline = train_from(j.at("click_baseline"));
    const auto& pr = j.at("protocol");
    c.protocol.seeds = pr.at("seeds").get<std::vector<std::uint64_t>>();
    c.protocol.thetas = pr.at("thetas").get<std::vector<double>>();
    c.protocol.rhos = pr.at("rhos").get<std::vector<double>>();
    c.protocol.mappings = pr.at("mappings").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string RunConfig::hash() const {
  json j = to_json();
  j.erase("artifact_dir");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return RunConfig::from_json(j);
}

void apply_env_overrides(RunConfig& config) {
  if (const char* s = std::getenv("WEAKMATCH_SEED"); s && *s) {
    std::uint64_t v = 0;
    const char* end = s + std::char_traits<char>::length(s);
    auto [ptr, ec] = std::from_chars(s, end, v);
    if (ec != std::errc() || ptr != end) {
      throw ConfigError(std::string("WEAKMATCH_SEED is not an unsigned integer: '") + s + "'");
    }
    config.seed = v;
  }
  if (const char* d = std::getenv("WEAKMATCH_ARTIFACT_DIR"); d && *d) config.artifact_dir = d;
}

}  // namespace weakmatch
