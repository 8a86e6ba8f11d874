#include "doctest.h"
#include "gradient_cases.hpp"

#include <filesystem>
#include <fstream>

#include "weakmatch/annotate.hpp"
#include "weakmatch/error.hpp"

using namespace weakmatch;
namespace fs = std::filesystem;

namespace {

class ConstAnnotator : public Annotator {
 public:
  explicit ConstAnnotator(double v) : v_(v) {}
  AnnotatorKind kind() const override { return AnnotatorKind::gbdt; }
  std::vector<double> score(std::span<const EncodedPair> pairs) override {
    return std::vector<double>(pairs.size(), v_);
  }
  void save(const fs::path&, const std::string&, const std::string&) const override {}

 private:
  double v_;
};

struct Toy {
  std::vector<LabeledSample> samples;
  std::vector<EncodedPair> encoded;
  std::vector<GradedLabel> labels;
};

Toy toy(std::size_t n) {
  Toy t;
  Rng rng(17);
  for (std::size_t i = 0; i < n; ++i) {
    LabeledSample s;
    s.query = "q" + std::to_string(i % 7);
    s.listing = {"k" + std::to_string(i % 5), "title " + std::to_string(i), "lp"};
    s.label = {static_cast<int>(rng.index(5)), static_cast<int>(rng.index(6))};
    t.samples.push_back(s);
    t.encoded.push_back(gradcheck::encoded_pair(i, 9));
    // Make the main label learnable from the lexical features.
    t.encoded.back().lexical[0] = s.label.ac > 0 ? 0.8 : 0.2;
    t.labels.push_back(s.label);
  }
  return t;
}

AnnotatorConfig small_config() {
  AnnotatorConfig c;
  c.dc = {4, 1, true};
  c.train.epochs = 2;
  c.gbdt.n_trees = 5;
  c.gbdt.min_samples_leaf = 2;
  return c;
}

}  // namespace

TEST_CASE("single annotator scores pass through and ensembles average") {
  auto t = toy(4);
  ConstAnnotator a(0.2), b(0.8);
  Annotator* one[] = {&a};
  Annotator* two[] = {&a, &b};
  CHECK(ensemble_scores(one, t.encoded) == std::vector<double>(4, 0.2));
  CHECK(ensemble_scores(two, t.encoded) == std::vector<double>(4, 0.5));
}

TEST_CASE("dc annotator scores are its composite and scoring is deterministic") {
  auto t = toy(40);
  auto ann = train_annotator(AnnotatorKind::dc, t.encoded, t.labels, {}, 9, small_config());
  auto* dc = dynamic_cast<DcAnnotator*>(ann.get());
  REQUIRE(dc != nullptr);
  CHECK(dc->score(t.encoded) == dc->model().predict(t.encoded).composite);
  Annotator* members[] = {ann.get()};
  auto first = score_dataset(members, t.samples, t.encoded);
  CHECK(first == score_dataset(members, t.samples, t.encoded));
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].binary_label == main_label(t.labels[i]));
    CHECK(first[i].s >= 0.0);
    CHECK(first[i].s <= 1.0);
  }
}

TEST_CASE("training needs both main-task classes") {
  auto t = toy(20);
  for (auto& l : t.labels) l.ac = 0;
  CHECK_THROWS_AS(train_annotator(AnnotatorKind::dc, t.encoded, t.labels, {}, 9, small_config()),
                  ConfigError);
  CHECK_THROWS_AS(
      train_annotator(AnnotatorKind::gbdt, t.encoded, t.labels, {}, 9, small_config()),
      ConfigError);
}

TEST_CASE("single-task and multi-task dc configs") {
  auto c = small_config();
  CHECK(c.task_set().size() == 9);
  c.label_sets = {LabelSet::ac};
  CHECK(c.task_set().size() == 4);
  c.multi_task = false;
  CHECK(c.task_set() == TaskSet::single_task());
}

TEST_CASE("annotators reload from either file kind") {
  auto t = toy(60);
  auto dir = fs::temp_directory_path() / "weakmatch-test-annotate";
  fs::create_directories(dir);
  for (auto kind : {AnnotatorKind::dc, AnnotatorKind::gbdt}) {
    auto ann = train_annotator(kind, t.encoded, t.labels, {}, 9, small_config());
    auto path = dir / (std::string(annotator_kind_name(kind)) + ".model");
    ann->save(path, "vocab.tsv", "hash");
    auto back = load_annotator(path);
    CHECK(back->kind() == kind);
    CHECK(back->score(t.encoded) == ann->score(t.encoded));
  }
  CHECK(parse_annotator_kind("dt") == AnnotatorKind::gbdt);
  CHECK_THROWS_AS(parse_annotator_kind("svm"), ConfigError);
}

TEST_CASE("scored sets round-trip and reject bad scores") {
  auto t = toy(10);
  ConstAnnotator a(0.25);
  Annotator* members[] = {&a};
  auto dir = fs::temp_directory_path() / "weakmatch-test-annotate";
  fs::create_directories(dir);
  auto labeled = score_dataset(members, t.samples, t.encoded);
  save_scored(dir / "labeled.tsv", labeled);
  CHECK(load_scored(dir / "labeled.tsv") == labeled);

  std::vector<UnlabeledPair> pairs;
  for (const auto& s : t.samples) pairs.push_back({s.query, s.listing, std::nullopt});
  auto unlabeled = score_dataset(members, pairs, t.encoded);
  save_scored(dir / "unlabeled.tsv", unlabeled);
  auto back = load_scored(dir / "unlabeled.tsv");
  CHECK(back == unlabeled);
  CHECK_FALSE(back[0].label.has_value());

  std::ofstream(dir / "bad.tsv") << "query\tkeyword\tad_title\tlp_title\ts\nq\tk\ta\tl\t1.5\n";
  CHECK_THROWS_AS(load_scored(dir / "bad.tsv"), FormatError);
}
