#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "weakmatch/corpus.hpp"
#include "weakmatch/featurize.hpp"
#include "weakmatch/models.hpp"
#include "weakmatch/tensor.hpp"

namespace weakmatch {

/// Precomputed ad-side encodings of a frozen CDSSM, one row per ad.
struct VectorDictionary {
  std::size_t dim = 0;
  std::uint64_t model_fingerprint = 0;
  std::uint64_t vocab_fingerprint = 0;
  std::vector<std::uint64_t> ids;
  nn::Tensor vectors;  // [ids.size(), dim], unit rows

  std::size_t size() const { return ids.size(); }
  std::span<const double> row(std::size_t i) const {
    return {vectors.data() + i * dim, dim};
  }
};

/// Encodes every listing with the ad tower. Throws ConfigError when the vocab
/// size differs from the model's input width or ids are not unique.
VectorDictionary build_dictionary(CdssmModel& model, const TrigramVocab& vocab,
                                  std::span<const AdListing> ads,
                                  std::span<const std::uint64_t> ids,
                                  const FieldLimits& limits = {});

/// Query-tower encoding of one query.
std::vector<double> encode_query(CdssmModel& model, const TrigramVocab& vocab,
                                 std::string_view query, const FieldLimits& limits = {});

struct RetrievalHit {
  std::uint64_t id = 0;
  double score = 0.0;
  bool operator==(const RetrievalHit&) const = default;
};

/// Score of one (query, ad) pair from their encodings; identical to the
/// model's pair score.
double dictionary_score(std::span<const double> query, std::span<const double> ad);

/// The k best ads by score, ties broken by ascending id. k larger than the
/// dictionary returns every ad.
std::vector<RetrievalHit> top_k(const VectorDictionary& dict, std::span<const double> query,
                                std::size_t k);

/// Layout (little-endian): "WMDICT01" u32 version u64 dim u64 count
/// u64 model_fingerprint u64 vocab_fingerprint u64 ids[count] f64 rows[count*dim].
void save_dictionary(const std::filesystem::path& path, const VectorDictionary& dict);
VectorDictionary load_dictionary(const std::filesystem::path& path);

}  // namespace weakmatch
