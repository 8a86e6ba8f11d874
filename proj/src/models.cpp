#include "weakmatch/models.hpp"

#include <algorithm>
#include <bit>

#include "weakmatch/error.hpp"
#include "weakmatch/rng.hpp"

namespace weakmatch {

namespace {

void add_word(nn::SparseRows& rows, const HashedWord& w) {
  for (const auto& c : w) {
    rows.indices.push_back(c.index);
    rows.values.push_back(static_cast<double>(c.count));
  }
  rows.offsets.push_back(rows.indices.size());
}

void add_words(nn::SparseRows& rows, const std::vector<HashedWord>& words) {
  for (const auto& w : words) add_word(rows, w);
}

// Summed trigram counts of one field as a single sparse row.
void add_bag(nn::SparseRows& rows, const std::vector<HashedWord>& words) {
  std::vector<TrigramCount> all;
  for (const auto& w : words) all.insert(all.end(), w.begin(), w.end());
  std::sort(all.begin(), all.end(),
            [](const TrigramCount& a, const TrigramCount& b) { return a.index < b.index; });
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    double count = 0.0;
    while (j < all.size() && all[j].index == all[i].index) count += all[j++].count;
    rows.indices.push_back(all[i].index);
    rows.values.push_back(count);
    i = j;
  }
  rows.offsets.push_back(rows.indices.size());
}

std::uint64_t hash_tensor(const nn::Tensor& t, std::uint64_t h) {
  for (double v : t.values()) h = mix64(h ^ std::bit_cast<std::uint64_t>(v));
  return h;
}

std::vector<const FieldSequences*> field_ptrs(std::span<const EncodedPair> pairs, std::size_t lo,
                                              std::size_t hi) {
  std::vector<const FieldSequences*> out;
  out.reserve(hi - lo);
  for (std::size_t i = lo; i < hi; ++i) out.push_back(&pairs[i].fields);
  return out;
}

}  // namespace

nn::WordBatch query_words(std::span<const FieldSequences* const> batch) {
  nn::WordBatch wb;
  for (const auto* f : batch) {
    if (f->query.empty()) {
      wb.words.add_empty_row();
    } else {
      add_words(wb.words, f->query);
    }
    wb.end_sequence();
  }
  return wb;
}

nn::WordBatch ad_words(std::span<const FieldSequences* const> batch) {
  nn::WordBatch wb;
  for (const auto* f : batch) {
    add_words(wb.words, f->keyword);
    wb.words.add_empty_row();
    add_words(wb.words, f->ad_title);
    wb.words.add_empty_row();
    add_words(wb.words, f->lp_title);
    wb.end_sequence();
  }
  return wb;
}

// ---- CDSSM -------------------------------------------------------------------

CdssmModel::CdssmModel(std::size_t vocab_size, CdssmConfig config, std::uint64_t seed)
    : vocab_size_(vocab_size), config_(config) {
  if (vocab_size == 0 || config.conv_channels == 0 || config.semantic_dim == 0) {
    throw ConfigError("cdssm: vocab size and layer widths must be > 0");
  }
  for (Side side : {Side::query, Side::ad}) {
    const std::string prefix = side == Side::query ? "query" : "ad";
    tower(side) = Tower{
        nn::WordConv(prefix + ".conv", vocab_size, config.conv_channels, seed),
        nn::Dense(prefix + ".semantic", config.conv_channels, config.semantic_dim, seed)};
  }
}

nn::Var CdssmModel::encode(nn::Tape& t, Side side, nn::WordBatch words) {
  Tower& tw = tower(side);
  auto starts = words.starts;
  nn::Var h = tw.conv.forward(t, std::move(words));
  h = nn::tanh(t, h);
  h = nn::segment_max(t, h, std::move(starts));
  h = tw.semantic.forward(t, h);
  h = nn::tanh(t, h);
  return nn::l2_normalize_rows(t, h);
}

nn::Var CdssmModel::score(nn::Tape& t, nn::WordBatch query, nn::WordBatch ad) {
  nn::Var q = encode(t, Side::query, std::move(query));
  nn::Var a = encode(t, Side::ad, std::move(ad));
  return nn::affine(t, nn::row_dot(t, q, a), kScoreScale, kScoreShift);
}

std::vector<double> CdssmModel::score_pairs(std::span<const EncodedPair> pairs, std::size_t batch) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (std::size_t lo = 0; lo < pairs.size(); lo += batch) {
    const std::size_t hi = std::min(pairs.size(), lo + batch);
    const auto fields = field_ptrs(pairs, lo, hi);
    nn::Tape t;
    nn::Var s = score(t, query_words(fields), ad_words(fields));
    for (double v : t.value(s).values()) out.push_back(std::clamp(v, 0.0, 1.0));
  }
  return out;
}

nn::Tensor CdssmModel::encode_fields(Side side, std::span<const FieldSequences* const> fields,
                                     std::size_t batch) {
  nn::Tensor out({fields.size(), config_.semantic_dim});
  for (std::size_t lo = 0; lo < fields.size(); lo += batch) {
    const std::size_t hi = std::min(fields.size(), lo + batch);
    auto part = fields.subspan(lo, hi - lo);
    nn::Tape t;
    nn::Var v = encode(t, side, side == Side::query ? query_words(part) : ad_words(part));
    const nn::Tensor& e = t.value(v);
    std::copy(e.data(), e.data() + e.size(), out.data() + lo * config_.semantic_dim);
  }
  return out;
}

std::vector<nn::Parameter*> CdssmModel::parameters() {
  std::vector<nn::Parameter*> out;
  for (Side side : {Side::query, Side::ad}) {
    tower(side).conv.collect(out);
    tower(side).semantic.collect(out);
  }
  return out;
}

nlohmann::json CdssmModel::descriptor() const {
  return {{"kind", "cdssm"},
          {"vocab_size", vocab_size_},
          {"conv_channels", config_.conv_channels},
          {"semantic_dim", config_.semantic_dim},
          {"window", nn::WordConv::kWindow}};
}

nn::Checkpoint CdssmModel::to_checkpoint() const {
  nn::Checkpoint ckpt;
  ckpt.architecture = descriptor();
  nn::export_parameters(const_cast<CdssmModel*>(this)->parameters(), ckpt);
  return ckpt;
}

CdssmModel CdssmModel::from_checkpoint(const nn::Checkpoint& ckpt) {
  const auto& a = ckpt.architecture;
  if (a.value("kind", "") != "cdssm") throw FormatError("checkpoint is not a CDSSM model");
  CdssmModel m(a.at("vocab_size").get<std::size_t>(),
               {a.at("conv_channels").get<std::size_t>(), a.at("semantic_dim").get<std::size_t>()},
               0);
  nn::import_parameters(ckpt, m.parameters());
  return m;
}

std::uint64_t CdssmModel::fingerprint() const {
  std::uint64_t h = fnv1a(descriptor().dump());
  for (auto* p : const_cast<CdssmModel*>(this)->parameters()) {
    h = hash_tensor(p->value, fnv1a(p->name, h));
  }
  return h;
}

// ---- Deep Crossing ---------------------------------------------------------------

DeepCrossingModel::DeepCrossingModel(std::size_t vocab_size, DeepCrossingConfig config,
                                     TaskSet tasks, std::uint64_t seed)
    : vocab_size_(vocab_size),
      config_(config),
      tasks_(std::move(tasks)),
      embedding_("embedding", vocab_size, config.embedding_dim, seed),
      heads_("heads", 4 * config.embedding_dim, tasks_.size(), seed) {
  if (vocab_size == 0 || config.embedding_dim == 0) {
    throw ConfigError("deep crossing: vocab size and embedding width must be > 0");
  }
  for (std::size_t k = 0; k < config.residual_units; ++k) {
    residual_.emplace_back("residual" + std::to_string(k), width(), seed, config.batchnorm);
  }
}

nn::Var DeepCrossingModel::forward(nn::Tape& t, std::span<const EncodedPair* const> batch,
                                   bool training) {
  std::array<nn::SparseRows, 4> bags;
  for (const auto* p : batch) {
    add_bag(bags[0], p->fields.query);
    add_bag(bags[1], p->fields.keyword);
    add_bag(bags[2], p->fields.ad_title);
    add_bag(bags[3], p->fields.lp_title);
  }
  std::array<nn::Var, 4> fields;
  for (std::size_t f = 0; f < 4; ++f) {
    fields[f] = nn::relu(t, embedding_.forward(t, std::move(bags[f])));
  }
  nn::Var h = nn::concat_cols(t, fields);
  for (auto& unit : residual_) h = nn::relu(t, unit.forward(t, h, training));
  return nn::sigmoid(t, heads_.forward(t, h));
}

DeepCrossingModel::Output DeepCrossingModel::predict(std::span<const EncodedPair> pairs,
                                                     std::size_t batch) {
  Output out;
  out.probabilities = nn::Tensor({pairs.size(), tasks_.size()});
  out.composite.reserve(pairs.size());
  for (std::size_t lo = 0; lo < pairs.size(); lo += batch) {
    const std::size_t hi = std::min(pairs.size(), lo + batch);
    std::vector<const EncodedPair*> ptrs;
    for (std::size_t i = lo; i < hi; ++i) ptrs.push_back(&pairs[i]);
    nn::Tape t;
    const nn::Tensor& p = t.value(forward(t, ptrs, false));
    std::copy(p.data(), p.data() + p.size(), out.probabilities.data() + lo * tasks_.size());
    for (std::size_t r = 0; r < p.rows(); ++r) {
      out.composite.push_back(
          composite_score({p.data() + r * tasks_.size(), tasks_.size()}, tasks_));
    }
  }
  return out;
}

std::vector<nn::Parameter*> DeepCrossingModel::parameters() {
  std::vector<nn::Parameter*> out;
  embedding_.collect(out);
  for (auto& unit : residual_) unit.collect(out);
  heads_.collect(out);
  return out;
}

nlohmann::json DeepCrossingModel::descriptor() const {
  nlohmann::json tasks = nlohmann::json::array();
  for (const auto& wt : tasks_.tasks()) {
    tasks.push_back({{"label_set", label_set_name(wt.task.label_set)},
                     {"max_negative", wt.task.max_negative},
                     {"weight", wt.weight}});
  }
  return {{"kind", "deep-crossing"},
          {"vocab_size", vocab_size_},
          {"embedding_dim", config_.embedding_dim},
          {"residual_units", config_.residual_units},
          {"batchnorm", config_.batchnorm},
          {"tasks", tasks}};
}

nn::Checkpoint DeepCrossingModel::to_checkpoint() const {
  nn::Checkpoint ckpt;
  ckpt.architecture = descriptor();
  nn::export_parameters(const_cast<DeepCrossingModel*>(this)->parameters(), ckpt);
  return ckpt;
}

DeepCrossingModel DeepCrossingModel::from_checkpoint(const nn::Checkpoint& ckpt) {
  const auto& a = ckpt.architecture;
  if (a.value("kind", "") != "deep-crossing") {
    throw FormatError("checkpoint is not a Deep Crossing model");
  }
  std::vector<WeightedTask> tasks;
  for (const auto& t : a.at("tasks")) {
    tasks.push_back({{parse_label_set(t.at("label_set").get<std::string>()),
                      t.at("max_negative").get<int>()},
                     t.at("weight").get<double>()});
  }
  DeepCrossingModel m(a.at("vocab_size").get<std::size_t>(),
                      {a.at("embedding_dim").get<std::size_t>(),
                       a.at("residual_units").get<std::size_t>(), a.at("batchnorm").get<bool>()},
                      TaskSet(std::move(tasks)), 0);
  nn::import_parameters(ckpt, m.parameters());
  return m;
}

double composite_score(std::span<const double> head_probabilities, const TaskSet& tasks) {
  if (head_probabilities.size() != tasks.size()) {
    throw RuntimeError("composite_score: one probability per task required");
  }
  double s = 0.0;
  for (std::size_t k = 0; k < tasks.size(); ++k) s += tasks.tasks()[k].weight * head_probabilities[k];
  return s;
}

std::vector<double> task_labels(std::span<const GradedLabel> labels, const TaskSet& tasks) {
  std::vector<double> out;
  out.reserve(labels.size() * tasks.size());
  for (const auto& l : labels) {
    for (const auto& wt : tasks.tasks()) out.push_back(binarize(l, wt.task));
  }
  return out;
}

nn::Var mtl_loss(nn::Tape& t, nn::Var probabilities, std::vector<double> labels,
                 const TaskSet& tasks) {
  const nn::Tensor& p = t.value(probabilities);
  if (p.cols() != tasks.size() || labels.size() != p.size()) {
    throw RuntimeError("mtl_loss: missing label for a task (need " +
                       std::to_string(p.rows() * tasks.size()) + " labels, got " +
                       std::to_string(labels.size()) + ")");
  }
  std::vector<double> weights(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) weights[i] = tasks.tasks()[i % tasks.size()].weight;
  return nn::cross_entropy(t, probabilities, std::move(labels), std::move(weights));
}

}  // namespace weakmatch
