#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "weakmatch/checkpoint.hpp"
#include "weakmatch/error.hpp"

using namespace weakmatch;
using namespace weakmatch::nn;
namespace fs = std::filesystem;

namespace {

Checkpoint sample() {
  Checkpoint c;
  c.architecture = {{"kind", "test"}, {"width", 3}};
  c.vocab_path = "vocab.tsv";
  c.config_hash = "0123456789abcdef";
  c.tensors.push_back({"a", Tensor({2, 3}, {1, 2, 3, 4, 5, 6.5})});
  c.tensors.push_back({"b", Tensor({1}, {-0.1})});
  return c;
}

}  // namespace

TEST_CASE("checkpoints round-trip bit for bit") {
  auto path = fs::temp_directory_path() / "weakmatch-test.ckpt";
  auto c = sample();
  save_checkpoint(path, c);
  auto back = load_checkpoint(path);
  CHECK(back == c);
  CHECK(back.tensor("b")[0] == -0.1);
  CHECK_THROWS_AS(back.tensor("missing"), FormatError);
}

TEST_CASE("corrupt checkpoints are format errors") {
  auto path = fs::temp_directory_path() / "weakmatch-test-bad.ckpt";
  save_checkpoint(path, sample());
  const auto full = fs::file_size(path);
  fs::resize_file(path, full - 4);
  CHECK_THROWS_AS(load_checkpoint(path), FormatError);
  std::ofstream(path, std::ios::binary) << "NOTACKPT";
  CHECK_THROWS_AS(load_checkpoint(path), FormatError);
  CHECK_THROWS_AS(load_checkpoint(fs::temp_directory_path() / "weakmatch-none.ckpt"), FormatError);
}

TEST_CASE("parameters export and import by name") {
  Parameter w("w", Tensor({2}, {1.0, 2.0}));
  Parameter m("m", Tensor({1}, {3.0}), false);
  Checkpoint c;
  export_parameters({&w, &m}, c);
  Parameter w2("w", Tensor({2}, 0.0));
  Parameter m2("m", Tensor({1}, 0.0), false);
  import_parameters(c, {&w2, &m2});
  CHECK(w2.value == w.value);
  CHECK(m2.value == m.value);
  Parameter wrong("w", Tensor({3}, 0.0));
  CHECK_THROWS_AS(import_parameters(c, {&wrong}), FormatError);
}
