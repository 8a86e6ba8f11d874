#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "weakmatch/corpus.hpp"
#include "weakmatch/error.hpp"
#include "weakmatch/tasks.hpp"

using namespace weakmatch;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("weakmatch-test-corpus-" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CorpusSpec small_spec(std::uint64_t seed) {
  CorpusSpec s;
  s.n_labeled = 100;
  s.n_unlabeled = 200;
  s.n_clicked = 200;
  s.n_test = 50;
  s.seed = seed;
  return s;
}

void save_all(const Corpus& c, const fs::path& dir) {
  save_labeled(dir / "labeled.tsv", c.labeled);
  save_labeled(dir / "test.tsv", c.test);
  save_unlabeled(dir / "unlabeled.tsv", c.unlabeled, DatasetKind::unlabeled);
  save_unlabeled(dir / "clicked.tsv", c.clicked, DatasetKind::clicked);
}

}  // namespace

TEST_CASE("generation is deterministic down to the bytes") {
  auto a = temp_dir("det-a");
  auto b = temp_dir("det-b");
  save_all(generate_corpus(small_spec(7)), a);
  save_all(generate_corpus(small_spec(7)), b);
  for (const char* f : {"labeled.tsv", "test.tsv", "unlabeled.tsv", "clicked.tsv"}) {
    CHECK(slurp(a / f) == slurp(b / f));
  }
  auto c = generate_corpus(small_spec(8));
  CHECK(c.labeled != generate_corpus(small_spec(7)).labeled);
}

TEST_CASE("full attribute match is the top grade on both label sets") {
  auto c = generate_corpus(CorpusSpec{});
  std::size_t full = 0;
  for (std::size_t i = 0; i < c.labeled.size(); ++i) {
    const auto& lat = c.labeled_latent[i];
    if (lat.overlap == 5) {
      ++full;
      CHECK(c.labeled[i].label == GradedLabel{4, 5});
    }
    if (lat.overlap == 0) CHECK(c.labeled[i].label.ac == 0);
  }
  CHECK(full > 0);
}

TEST_CASE("every grade appears") {
  auto c = generate_corpus(CorpusSpec{});
  std::set<int> ac, lp;
  for (const auto& s : c.labeled) {
    ac.insert(s.label.ac);
    lp.insert(s.label.lp);
  }
  CHECK(ac.size() == 5);
  CHECK(lp.size() == 6);
}

TEST_CASE("click noise rate sets the false-positive fraction") {
  CorpusSpec s;
  s.click_noise_rate = 0.1;
  s.n_clicked = 10000;
  s.n_unlabeled = 100;
  auto c = generate_corpus(s);
  REQUIRE(c.clicked_truth.size() == 10000);
  std::size_t zero = 0;
  for (const auto& g : c.clicked_truth) zero += g.ac == 0;
  CHECK(static_cast<double>(zero) / 10000.0 == doctest::Approx(0.10).epsilon(0.1));
  for (const auto& p : c.clicked) CHECK(p.clicked == true);
}

TEST_CASE("unlabeled pairs carry no labels and queries are normalized") {
  auto c = generate_corpus(small_spec(3));
  for (const auto& p : c.unlabeled) {
    CHECK_FALSE(p.clicked.has_value());
    CHECK(p.query == normalize_text(p.query));
  }
}

TEST_CASE("invalid specs are config errors") {
  CorpusSpec s;
  s.n_labeled = 0;
  CHECK_THROWS_AS(generate_corpus(s), ConfigError);
  s = CorpusSpec{};
  s.click_noise_rate = 1.0;
  CHECK_THROWS_AS(generate_corpus(s), ConfigError);
}

TEST_CASE("datasets round-trip through tsv") {
  auto dir = temp_dir("roundtrip");
  auto c = generate_corpus(small_spec(11));
  save_all(c, dir);
  CHECK(load_labeled(dir / "labeled.tsv") == c.labeled);
  CHECK(load_unlabeled(dir / "unlabeled.tsv", DatasetKind::unlabeled) == c.unlabeled);
  CHECK(load_unlabeled(dir / "clicked.tsv", DatasetKind::clicked) == c.clicked);
}

TEST_CASE("malformed rows name their line") {
  auto dir = temp_dir("bad");
  auto c = generate_corpus(small_spec(11));
  save_labeled(dir / "labeled.tsv", c.labeled);
  std::string text = slurp(dir / "labeled.tsv");
  // Corrupt the AC grade of the second data row (line 3).
  std::istringstream in(text);
  std::string line, out;
  for (int n = 1; std::getline(in, line); ++n) {
    if (n == 3) {
      auto cut = line.rfind('\t');
      auto cut2 = line.rfind('\t', cut - 1);
      line = line.substr(0, cut2) + "\t7" + line.substr(cut);
    }
    out += line + "\n";
  }
  std::ofstream(dir / "bad.tsv") << out;
  try {
    load_labeled(dir / "bad.tsv");
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
  std::ofstream(dir / "cols.tsv") << "query\tkeyword\n";
  CHECK_THROWS_AS(load_labeled(dir / "cols.tsv"), FormatError);
  CHECK_THROWS_AS(load_labeled(dir / "missing.tsv"), FormatError);
}

TEST_CASE("empty file is an empty dataset") {
  auto dir = temp_dir("empty");
  std::ofstream(dir / "e.tsv").close();
  CHECK(load_labeled(dir / "e.tsv").empty());
  CHECK(load_unlabeled(dir / "e.tsv", DatasetKind::unlabeled).empty());
}

TEST_CASE("splits have the documented sizes and are deterministic") {
  CorpusSpec s = small_spec(2);
  s.n_labeled = 1000;
  auto c = generate_corpus(s);
  auto [train, val] = split_labeled(c.labeled, 0.1, 5);
  CHECK(train.size() == 900);
  CHECK(val.size() == 100);
  auto again = split_labeled(c.labeled, 0.1, 5);
  CHECK(again.first == train);
  CHECK(again.second == val);

  std::vector<LabeledSample> three(c.labeled.begin(), c.labeled.begin() + 3);
  auto [t3, v3] = split_labeled(three, 0.5, 5);
  CHECK(v3.size() == 1);  // floor(0.5 * 3)
  CHECK(t3.size() == 2);
}

TEST_CASE("subsamples are nested prefixes") {
  CorpusSpec s = small_spec(2);
  s.n_labeled = 10000;
  s.n_unlabeled = 10;
  s.n_clicked = 10;
  auto c = generate_corpus(s);
  CHECK(subsample(c.labeled, 1.0, 3) == c.labeled);
  auto small = subsample(c.labeled, 0.2, 3);
  CHECK(small.size() == 2000);
  auto large = subsample(c.labeled, 0.5, 3);
  // Order is preserved, so nesting means small is a subsequence of large.
  std::size_t j = 0;
  for (const auto& x : large) {
    if (j < small.size() && x == small[j]) ++j;
  }
  CHECK(j == small.size());
}

TEST_CASE("text normalization") {
  CHECK(normalize_text("Red\tShoes\n") == "red shoes ");
  CHECK(normalize_text("") == "");
}
