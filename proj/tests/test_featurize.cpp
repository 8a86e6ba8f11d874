#include "doctest.h"

#include <filesystem>

#include "weakmatch/error.hpp"
#include "weakmatch/featurize.hpp"

using namespace weakmatch;

namespace {

TrigramVocab vocab_of(std::vector<std::string> texts) { return TrigramVocab::build(texts); }

}  // namespace

TEST_CASE("tokenization") {
  CHECK(tokenize("iPhone Cover") == std::vector<std::string>{"iphone", "cover"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("wi-fi 6e") == std::vector<std::string>{"wi", "fi", "6e"});
  CHECK(tokenize("  --  ").empty());
}

TEST_CASE("word trigrams use boundary markers") {
  CHECK(word_trigrams("cat") == std::vector<std::string>{"#ca", "cat", "at#"});
  CHECK(word_trigrams("aa") == std::vector<std::string>{"#aa", "aa#"});
  CHECK(word_trigrams("a") == std::vector<std::string>{"#a#"});
}

TEST_CASE("hashed words count trigrams at their vocab indices") {
  auto v = vocab_of({"cat dog"});
  auto h = hash_word("cat", v);
  REQUIRE(h.size() == 3);
  for (const auto& tc : h) CHECK(tc.count == 1);
  CHECK(h[0].index == v.find("#ca"));
  CHECK(h[1].index == v.find("at#"));
  CHECK(h[2].index == v.find("cat"));
  CHECK(hash_word("zzz", v).empty());
  // Repeated trigrams accumulate.
  auto v2 = vocab_of({"aaaa"});
  auto h2 = hash_word("aaaa", v2);
  CHECK(h2 == HashedWord{{static_cast<std::uint32_t>(v2.find("#aa")), 1},
                         {static_cast<std::uint32_t>(v2.find("aa#")), 1},
                         {static_cast<std::uint32_t>(v2.find("aaa")), 2}});
}

TEST_CASE("vocab indices are lexicographic and the vocab round-trips") {
  auto v = vocab_of({"dog cat"});
  auto t = v.trigrams();
  CHECK(std::is_sorted(t.begin(), t.end()));
  CHECK(v.find("nope") == -1);
  auto path = std::filesystem::temp_directory_path() / "weakmatch-test-vocab.tsv";
  v.save(path);
  auto back = TrigramVocab::load(path);
  CHECK(back == v);
  CHECK(back.fingerprint() == v.fingerprint());
  CHECK(vocab_of({"dog"}).fingerprint() != v.fingerprint());
}

TEST_CASE("field sequences truncate and accept empty fields") {
  auto v = vocab_of({"w"});
  std::string q;
  for (int i = 0; i < 40; ++i) q += "w ";
  AdListing ad{"w", "w w", ""};
  auto f = featurize_fields(q, ad, v);
  CHECK(f.query.size() == 20);
  CHECK(f.keyword.size() == 1);
  CHECK(f.ad_title.size() == 2);
  CHECK(f.lp_title.empty());
  CHECK(featurize_fields(q, ad, v) == f);
  FieldLimits limits;
  limits.query = 3;
  CHECK(featurize_fields(q, ad, v, limits).query.size() == 3);
}

TEST_CASE("lexical features") {
  auto same = lexical_features("red shoes", {"red shoes", "red shoes", "red shoes"});
  CHECK(same[0] == 1.0);
  CHECK(same[11] == 1.0);
  CHECK(same[4] == doctest::Approx(1.0).epsilon(1e-12));

  auto swapped = lexical_features("red shoes", {"shoes red", "x", "y"});
  CHECK(swapped[0] == 1.0);
  CHECK(swapped[11] == 0.0);

  auto disjoint = lexical_features("abc", {"xyz", "uvw", "rst"});
  for (std::size_t i = 0; i < 8; ++i) CHECK(disjoint[i] == 0.0);
  CHECK(disjoint[11] == 0.0);

  // One shared word out of three distinct: Jaccard 1/3.
  auto partial = lexical_features("red shoes", {"red hat", "", ""});
  CHECK(partial[0] == doctest::Approx(1.0 / 3.0));
  CHECK(partial[8] == 1.0);
}
