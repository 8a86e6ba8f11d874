#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "weakmatch-test-cli";

const char* kTinyConfig = R"({
  "corpus": {"n_labeled": 400, "n_unlabeled": 800, "n_clicked": 400, "n_test": 200},
  "annotator": {"dc": {"embedding_dim": 16}, "train": {"epochs": 2}, "gbdt": {"n_trees": 10}},
  "student": {"conv_channels": 16, "semantic_dim": 8, "train": {"epochs": 1}},
  "finetune": {"train": {"epochs": 1}},
  "labeled_baseline": {"epochs": 1},
  "click_baseline": {"epochs": 1},
  "protocol": {"seeds": [1], "rhos": [0.5], "thetas": [0.5]}
})";

struct Run {
  int code;
  std::string out;
};

Run cli(const std::string& args) {
  const fs::path log = kRoot / "last-output.txt";
  const std::string cmd = std::string(WEAKMATCH_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string common(const std::string& run) {
  return "--config " + (kRoot / "tiny.json").string() + " --artifact-dir " + (kRoot / run).string();
}

struct Setup {
  Setup() {
    fs::remove_all(kRoot);
    fs::create_directories(kRoot);
    std::ofstream(kRoot / "tiny.json") << kTinyConfig;
  }
};

const Setup setup_once;

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(cli("").code == 2);
  CHECK(cli("--bogus").code == 2);
  CHECK(cli("eval --no-such-flag").code == 2);
  CHECK(cli("train-annotator --kind svm").code == 2);
}

TEST_CASE("config errors exit with 3 and print a json error line") {
  std::ofstream(kRoot / "bad.json") << R"({"seeed": 1})";
  auto r = cli("gen-data --config " + (kRoot / "bad.json").string());
  CHECK(r.code == 3);
  CHECK(r.out.find("\"error\":\"config\"") != std::string::npos);
  CHECK(cli("gen-data --config " + (kRoot / "missing.json").string()).code == 3);
}

TEST_CASE("the staged workflow runs end to end") {
  const std::string c = common("staged");
  const fs::path run = kRoot / "staged";
  REQUIRE(cli("gen-data " + c).code == 0);
  for (const char* f : {"labeled.tsv", "test.tsv", "unlabeled.tsv", "clicked.tsv",
                        "labeled_train.tsv", "labeled_val.tsv"}) {
    CHECK(fs::exists(run / "data" / f));
  }
  REQUIRE(cli("train-annotator --kind dc " + c).code == 0);
  REQUIRE(cli("train-annotator --kind gbdt " + c).code == 0);
  const std::string anns = " --annotator " + (run / "checkpoints/annotator-dc.ckpt").string() +
                           " --annotator " + (run / "checkpoints/annotator-gbdt.gbdt").string();
  REQUIRE(cli("score " + c + anns + " --kind unlabeled --input " +
              (run / "data/unlabeled.tsv").string()).code == 0);
  REQUIRE(cli("score " + c + anns + " --kind labeled --input " +
              (run / "data/labeled_train.tsv").string()).code == 0);
  REQUIRE(cli("train-student " + c + " --scored " + (run / "scored/unlabeled.tsv").string())
              .code == 0);
  REQUIRE(cli("finetune " + c + " --student " + (run / "checkpoints/student.ckpt").string() +
              " --scored " + (run / "scored/labeled_train.tsv").string() + " --theta 0.5")
              .code == 0);
  auto ev = cli("eval " + c + " --model " + (run / "checkpoints/finetuned.ckpt").string());
  REQUIRE(ev.code == 0);
  CHECK(ev.out.find("\"roc_auc\"") != std::string::npos);
  CHECK(ev.out.find("wall_clock_seconds") == std::string::npos);
  CHECK(cli("eval --timing " + c + " --model " + (run / "checkpoints/finetuned.ckpt").string())
            .out.find("wall_clock_seconds") != std::string::npos);
  auto rc = cli("recall " + c + " --model " + (run / "checkpoints/finetuned.ckpt").string() +
                " --query \"red shoes\" --k 3 --dict " + (run / "ads.dict").string());
  REQUIRE(rc.code == 0);
  CHECK(fs::exists(run / "ads.dict"));
}

TEST_CASE("data-format and runtime errors map to their exit codes") {
  const std::string c = common("staged");
  std::ofstream(kRoot / "broken.tsv") << "query\tkeyword\n";
  auto r = cli("eval " + c + " --model " + (kRoot / "staged/checkpoints/student.ckpt").string() +
               " --test " + (kRoot / "broken.tsv").string());
  CHECK(r.code == 4);
  CHECK(r.out.find("\"error\":\"data-format\"") != std::string::npos);
  // Evaluating on a single-class set is a runtime failure.
  {
    std::istringstream in(slurp(kRoot / "staged/data/test.tsv"));
    std::ofstream out(kRoot / "negatives.tsv");
    std::string line;
    std::getline(in, line);
    out << line << "\n";
    while (std::getline(in, line)) {
      if (line.substr(line.rfind('\t', line.rfind('\t') - 1) + 1, 2) == "0\t") out << line << "\n";
    }
  }
  auto rt = cli("eval " + c + " --model " + (kRoot / "staged/checkpoints/student.ckpt").string() +
                " --test " + (kRoot / "negatives.tsv").string());
  CHECK(rt.code == 5);
  CHECK(rt.out.find("\"error\":\"runtime\"") != std::string::npos);
  // A missing input path is a configuration problem, not a malformed file.
  CHECK(cli("finetune " + c + " --student " + (kRoot / "nothing.ckpt").string() + " --scored " +
            (kRoot / "staged/scored/labeled_train.tsv").string()).code == 3);
  std::ofstream(kRoot / "garbage.ckpt") << "WMCKPT01 and then nothing useful";
  CHECK(cli("finetune " + c + " --student " + (kRoot / "garbage.ckpt").string() + " --scored " +
            (kRoot / "staged/scored/labeled_train.tsv").string()).code == 4);
}

TEST_CASE("pipeline reruns give identical metrics and the flag wins over the environment") {
  REQUIRE(cli("pipeline " + common("p1")).code == 0);
  REQUIRE(cli("pipeline " + common("p2")).code == 0);
  for (const char* f : {"reports/metrics.json", "reports/pipeline.jsonl"}) {
    CHECK(slurp(kRoot / "p1" / f) == slurp(kRoot / "p2" / f));
  }
  for (const char* f : {"checkpoints/annotator-dc.ckpt", "checkpoints/annotator-gbdt.gbdt",
                        "checkpoints/student.ckpt", "checkpoints/finetuned.ckpt",
                        "scored/unlabeled.tsv", "scored/labeled_train.tsv"}) {
    CHECK(fs::exists(kRoot / "p1" / f));
  }
  setenv("WEAKMATCH_SEED", "5", 1);
  REQUIRE(cli("gen-data " + common("env") + " --seed 6").code == 0);
  unsetenv("WEAKMATCH_SEED");
  CHECK(slurp(kRoot / "env/config.json").find("\"seed\": 6") != std::string::npos);
}
