#include "weakmatch/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <set>

#include "weakmatch/error.hpp"
#include "binary_io.hpp"

namespace weakmatch {

namespace {

constexpr char kMagic[8] = {'W', 'M', 'D', 'I', 'C', 'T', '0', '1'};
constexpr std::uint32_t kVersion = 1;

void check_vocab(const CdssmModel& model, const TrigramVocab& vocab) {
  if (vocab.size() != model.vocab_size()) {
    throw ConfigError("vocab has " + std::to_string(vocab.size()) + " trigrams but the model expects " +
                      std::to_string(model.vocab_size()));
  }
}

}  // namespace

VectorDictionary build_dictionary(CdssmModel& model, const TrigramVocab& vocab,
                                  std::span<const AdListing> ads,
                                  std::span<const std::uint64_t> ids, const FieldLimits& limits) {
  check_vocab(model, vocab);
  if (ads.size() != ids.size()) throw ConfigError("build_dictionary: ads and ids differ in length");
  if (std::set<std::uint64_t>(ids.begin(), ids.end()).size() != ids.size()) {
    throw ConfigError("build_dictionary: ad ids are not unique");
  }
  std::vector<FieldSequences> fields;
  fields.reserve(ads.size());
  for (const auto& ad : ads) fields.push_back(featurize_fields("", ad, vocab, limits));
  std::vector<const FieldSequences*> ptrs;
  ptrs.reserve(fields.size());
  for (const auto& f : fields) ptrs.push_back(&f);

  VectorDictionary dict;
  dict.dim = model.config().semantic_dim;
  dict.model_fingerprint = model.fingerprint();
  dict.vocab_fingerprint = vocab.fingerprint();
  dict.ids.assign(ids.begin(), ids.end());
  dict.vectors = ads.empty() ? nn::Tensor({0, dict.dim}) : model.encode_fields(Side::ad, ptrs);
  return dict;
}

std::vector<double> encode_query(CdssmModel& model, const TrigramVocab& vocab,
                                 std::string_view query, const FieldLimits& limits) {
  check_vocab(model, vocab);
  const auto fields = featurize_fields(query, AdListing{}, vocab, limits);
  const FieldSequences* ptr = &fields;
  const auto t = model.encode_fields(Side::query, std::span<const FieldSequences* const>(&ptr, 1));
  return {t.values().begin(), t.values().end()};
}

double dictionary_score(std::span<const double> query, std::span<const double> ad) {
  double s = 0.0;
  for (std::size_t c = 0; c < query.size(); ++c) s += query[c] * ad[c];
  return cosine_to_score(s);
}

std::vector<RetrievalHit> top_k(const VectorDictionary& dict, std::span<const double> query,
                                std::size_t k) {
  if (query.size() != dict.dim) {
    throw ConfigError("top_k: query has dimension " + std::to_string(query.size()) +
                      ", dictionary " + std::to_string(dict.dim));
  }
  std::vector<RetrievalHit> hits(dict.size());
  for (std::size_t i = 0; i < dict.size(); ++i) {
    hits[i] = {dict.ids[i], dictionary_score(query, dict.row(i))};
  }
  const auto better = [](const RetrievalHit& a, const RetrievalHit& b) {
    return a.score != b.score ? a.score > b.score : a.id < b.id;
  };
  k = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(),
                    better);
  hits.resize(k);
  return hits;
}

void save_dictionary(const std::filesystem::path& path, const VectorDictionary& dict) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write " + path.string());
  out.write(kMagic, sizeof kMagic);
  binio::put_le<std::uint32_t>(out, kVersion);
  binio::put_le<std::uint64_t>(out, dict.dim);
  binio::put_le<std::uint64_t>(out, dict.size());
  binio::put_le<std::uint64_t>(out, dict.model_fingerprint);
  binio::put_le<std::uint64_t>(out, dict.vocab_fingerprint);
  for (auto id : dict.ids) binio::put_le<std::uint64_t>(out, id);
  for (double v : dict.vectors.values()) binio::put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw RuntimeError("write failed: " + path.string());
}

VectorDictionary load_dictionary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  char magic[8] = {};
  if (!in.read(magic, sizeof magic) || !std::equal(magic, magic + 8, kMagic)) {
    throw FormatError(path.string() + ": not a vector dictionary");
  }
  const auto version = binio::get_le<std::uint32_t>(in, path);
  if (version != kVersion) {
    throw FormatError(path.string() + ": unsupported dictionary version " + std::to_string(version));
  }
  VectorDictionary dict;
  dict.dim = binio::get_le<std::uint64_t>(in, path);
  const auto count = binio::get_le<std::uint64_t>(in, path);
  dict.model_fingerprint = binio::get_le<std::uint64_t>(in, path);
  dict.vocab_fingerprint = binio::get_le<std::uint64_t>(in, path);
  const auto expected = static_cast<std::uintmax_t>(44 + count * 8 + count * dict.dim * 8);
  if (std::filesystem::file_size(path) != expected) {
    throw FormatError(path.string() + ": size does not match header");
  }
  dict.ids.resize(count);
  for (auto& id : dict.ids) id = binio::get_le<std::uint64_t>(in, path);
  dict.vectors = nn::Tensor({static_cast<std::size_t>(count), dict.dim});
  for (auto& v : dict.vectors.values()) {
    v = std::bit_cast<double>(binio::get_le<std::uint64_t>(in, path));
  }
  return dict;
}

}  // namespace weakmatch
