#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace weakmatch {

struct AdListing {
  std::string keyword;
  std::string ad_title;
  std::string lp_title;

  bool operator==(const AdListing&) const = default;
};

inline constexpr int kMaxAcLabel = 4;
inline constexpr int kMaxLpLabel = 5;

struct GradedLabel {
  int ac = 0;  // ad-copy relevance, 0..4
  int lp = 0;  // landing-page relevance, 0..5

  bool operator==(const GradedLabel&) const = default;
};

struct LabeledSample {
  std::string query;
  AdListing listing;
  GradedLabel label;

  bool operator==(const LabeledSample&) const = default;
};

struct UnlabeledPair {
  std::string query;
  AdListing listing;
  std::optional<bool> clicked;  // only set for the clicked dataset

  bool operator==(const UnlabeledPair&) const = default;
};

struct CorpusSpec {
  std::size_t n_intents = 400;
  std::size_t vocab_size = 200;
  std::size_t n_labeled = 5000;
  std::size_t n_unlabeled = 50000;
  std::size_t n_clicked = 50000;
  std::size_t n_test = 2000;
  double click_noise_rate = 0.5;
  std::uint64_t seed = 1;

  /// Throws ConfigError when a count is zero or the noise rate is outside [0,1).
  void validate() const;
};


/// Attribute overlap tier used by the label function: 0 on category
/// mismatch, else 1 + number of shared attributes.
struct PairLatent {
  int overlap = 0;
  bool lp_bonus = false;

  bool operator==(const PairLatent&) const = default;
};

/// Generated corpus. The latent vectors run parallel to their datasets and
/// the `*_truth` vectors hold graded labels of the unlabeled and clicked
/// pairs; none of these are persisted, they exist for diagnostics and tests.
struct Corpus {
  std::vector<LabeledSample> labeled;
  std::vector<LabeledSample> test;
  std::vector<UnlabeledPair> unlabeled;
  std::vector<UnlabeledPair> clicked;
  std::vector<PairLatent> labeled_latent;
  std::vector<GradedLabel> unlabeled_truth;
  std::vector<GradedLabel> clicked_truth;
};

/// Latent-intent synthetic search log.
///
/// Each intent is a category plus four attribute values, each value being a
/// pseudo-word that may surface in a plural variant. A pair takes the query
/// from one intent and builds the listing from a mutated copy of it (or an
/// unrelated intent). The AC grade is 0 when the categories differ and the
/// number of matching attributes otherwise; the LP grade adds one when the
/// landing-page title repeats a matched attribute, and is 5 for a full match.
Corpus generate_corpus(const CorpusSpec& spec);


enum class DatasetKind { labeled, unlabeled, clicked };

const char* dataset_kind_name(DatasetKind kind);
DatasetKind parse_dataset_kind(const std::string& name);

// TSV persistence: UTF-8, one header line naming the columns, one sample per row.
void save_labeled(const std::filesystem::path& path, std::span<const LabeledSample> samples);
void save_unlabeled(const std::filesystem::path& path, std::span<const UnlabeledPair> pairs,
                    DatasetKind kind);

/// Streams the file row by row; the first malformed row raises FormatError
/// naming its line number. An empty file yields an empty sequence.
std::vector<LabeledSample> load_labeled(const std::filesystem::path& path);
std::vector<UnlabeledPair> load_unlabeled(const std::filesystem::path& path, DatasetKind kind);

/// Validation size is floor(fraction * N); the rest is training. Returns
/// (train, validation), each in original order.
std::pair<std::vector<LabeledSample>, std::vector<LabeledSample>> split_labeled(
    std::span<const LabeledSample> samples, double validation_fraction, std::uint64_t seed);

/// First round(rho * N) elements of a seed-determined permutation, so subsets
/// for smaller rho are prefixes (and hence subsets) of those for larger rho.
/// Original order is preserved within the subset.
std::vector<LabeledSample> subsample(std::span<const LabeledSample> samples, double rho,
                                     std::uint64_t seed);

/// Lowercase, printable, no tabs or newlines.
std::string normalize_text(std::string_view text);

}  // namespace weakmatch
