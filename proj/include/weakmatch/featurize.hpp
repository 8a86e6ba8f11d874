#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "weakmatch/corpus.hpp"

namespace weakmatch {

/// Lowercases and splits on runs of non-alphanumeric characters.
std::vector<std::string> tokenize(std::string_view text);

/// Letter trigrams of "#" + word + "#", in order, with repetition.
std::vector<std::string> word_trigrams(std::string_view word);

/// Frozen letter-trigram vocabulary with lexicographic index assignment.
class TrigramVocab {
 public:
  TrigramVocab() = default;

  /// Every trigram occurring in `texts` (frequency floor 1).
  static TrigramVocab build(std::span<const std::string> texts);
  static TrigramVocab from_trigrams(std::vector<std::string> trigrams);

  std::size_t size() const { return trigrams_.size(); }
  /// Index of `trigram` or -1 when absent.
  std::int64_t find(std::string_view trigram) const;
  const std::vector<std::string>& trigrams() const { return trigrams_; }
  std::uint64_t fingerprint() const;

  /// "trigram<TAB>index" per line.
  void save(const std::filesystem::path& path) const;
  static TrigramVocab load(const std::filesystem::path& path);

  bool operator==(const TrigramVocab& other) const { return trigrams_ == other.trigrams_; }

 private:
  std::vector<std::string> trigrams_;
  std::map<std::string, std::uint32_t, std::less<>> index_;
};

struct TrigramCount {
  std::uint32_t index;
  std::uint32_t count;
  bool operator==(const TrigramCount&) const = default;
};

/// Sparse trigram count vector of one word, sorted by index.
using HashedWord = std::vector<TrigramCount>;

HashedWord hash_word(std::string_view word, const TrigramVocab& vocab);

struct FieldLimits {
  std::size_t query = 20;
  std::size_t keyword = 10;
  std::size_t ad_title = 20;
  std::size_t lp_title = 20;
};

struct FieldSequences {
  std::vector<HashedWord> query;
  std::vector<HashedWord> keyword;
  std::vector<HashedWord> ad_title;
  std::vector<HashedWord> lp_title;
  bool operator==(const FieldSequences&) const = default;
};

/// Hashes each field word by word, keeping the first `limits` words per field.
FieldSequences featurize_fields(std::string_view query, const AdListing& listing,
                                const TrigramVocab& vocab, const FieldLimits& limits = {});

inline constexpr std::size_t kLexicalFeatureCount = 12;

/// Layout: [0..3] word Jaccard of the query against keyword, ad title,
/// LP title and all ad text; [4..7] char-trigram cosine for the same four
/// pairs; [8..10] word-count ratio min/max against keyword, ad title,
/// LP title; [11] exact token-sequence match of query and keyword.
using LexicalFeatures = std::array<double, kLexicalFeatureCount>;

LexicalFeatures lexical_features(std::string_view query, const AdListing& listing);

/// Featurized pair as consumed by the models.
struct EncodedPair {
  FieldSequences fields;
  LexicalFeatures lexical{};
};

EncodedPair encode_pair(std::string_view query, const AdListing& listing,
                        const TrigramVocab& vocab, const FieldLimits& limits = {});

template <typename Sample>
std::vector<EncodedPair> encode_all(std::span<const Sample> samples, const TrigramVocab& vocab,
                                    const FieldLimits& limits = {}) {
  std::vector<EncodedPair> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(encode_pair(s.query, s.listing, vocab, limits));
  return out;
}

/// Every text field of the samples, for vocabulary building.
template <typename Sample>
void collect_texts(std::span<const Sample> samples, std::vector<std::string>& out) {
  for (const auto& s : samples) {
    out.push_back(s.query);
    out.push_back(s.listing.keyword);
    out.push_back(s.listing.ad_title);
    out.push_back(s.listing.lp_title);
  }
}

}  // namespace weakmatch
