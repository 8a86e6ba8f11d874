#include "weakmatch/corpus.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "weakmatch/error.hpp"
#include "weakmatch/rng.hpp"
#include "tsv.hpp"

namespace weakmatch {

namespace {

using tsv::bad_row;
using tsv::open_out;
using tsv::parse_int;
using tsv::split_tabs;

constexpr int kAttributeSlots = 4;

// Shape of the generator. Pair mix: unrelated listing, category flip (hard
// negative sharing attributes), otherwise per-attribute mutation at one of
// three rates.
constexpr double kUnrelatedRate = 0.2;
constexpr double kCategoryFlipRate = 0.3;
constexpr std::array<double, 3> kMutationRates = {0.15, 0.4, 0.7};
constexpr double kPluralRate = 0.25;
constexpr double kQueryFillerRate = 0.3;
constexpr double kLpAttributeRate = 0.5;
constexpr int kMinClickedAc = 2;
// False-positive clicks go to irrelevant listings that still look relevant:
// at least this many attributes shared with the query.
constexpr int kMinDecoyShared = 2;

struct Intent {
  std::size_t category = 0;
  std::array<std::size_t, kAttributeSlots> attributes{};
};

struct World {
  std::vector<std::string> categories;
  std::array<std::vector<std::string>, kAttributeSlots> attributes;
  std::vector<std::string> fillers;
  std::vector<Intent> intents;
};

std::vector<std::string> make_words(std::size_t n, Rng& rng) {
  static constexpr std::string_view consonants = "bdfgklmnprtvz";
  static constexpr std::string_view vowels = "aeiou";
  std::set<std::string> seen;
  std::vector<std::string> out;
  out.reserve(n);
  while (out.size() < n) {
    const std::size_t syllables = 2 + rng.index(2);
    std::string w;
    for (std::size_t s = 0; s < syllables; ++s) {
      w += consonants[rng.index(consonants.size())];
      w += vowels[rng.index(vowels.size())];
    }
    if (rng.bernoulli(0.3)) w += consonants[rng.index(consonants.size())];
    if (seen.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

World make_world(const CorpusSpec& spec) {
  Rng rng(derive_seed(spec.seed, "world"));
  const std::size_t pool = std::max<std::size_t>(4, spec.vocab_size / 8);
  const std::size_t n_fillers =
      std::max<std::size_t>(4, spec.vocab_size - std::min(spec.vocab_size, 5 * pool));
  auto words = make_words(5 * pool + n_fillers, rng);
  World w;
  auto it = words.begin();
  w.categories.assign(it, it + pool);
  it += pool;
  for (auto& slot : w.attributes) {
    slot.assign(it, it + pool);
    it += pool;
  }
  w.fillers.assign(it, words.end());
  w.intents.resize(spec.n_intents);
  for (auto& intent : w.intents) {
    intent.category = rng.index(pool);
    for (auto& a : intent.attributes) a = rng.index(pool);
  }
  return w;
}

std::size_t other_than(std::size_t value, std::size_t n, Rng& rng) {
  const std::size_t v = rng.index(n - 1);
  return v >= value ? v + 1 : v;
}

std::string surface(const std::string& word, Rng& rng) {
  return rng.bernoulli(kPluralRate) ? word + "s" : word;
}

std::string join(std::vector<std::string> words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

struct GeneratedPair {
  std::string query;
  AdListing listing;
  GradedLabel label;
  PairLatent latent;
  int shared_attributes = 0;  // regardless of category
};

class PairGenerator {
 public:
  PairGenerator(const World& world, std::uint64_t seed) : world_(world), rng_(seed) {}

  GeneratedPair next() {
    const Intent& q = world_.intents[rng_.index(world_.intents.size())];
    const std::size_t pool = world_.categories.size();
    Intent l = q;
    if (rng_.bernoulli(kUnrelatedRate)) {
      l.category = rng_.index(pool);
      for (auto& a : l.attributes) a = rng_.index(pool);
    } else {
      if (rng_.bernoulli(kCategoryFlipRate)) l.category = other_than(l.category, pool, rng_);
      const double mutation = kMutationRates[rng_.index(kMutationRates.size())];
      for (auto& a : l.attributes) {
        if (rng_.bernoulli(mutation)) a = other_than(a, pool, rng_);
      }
    }
    return render(q, l);
  }

 private:
  GeneratedPair render(const Intent& q, const Intent& l) {
    GeneratedPair p;

    std::vector<std::string> query{surface(world_.categories[q.category], rng_)};
    for (int k = 0; k < kAttributeSlots; ++k) {
      query.push_back(surface(world_.attributes[k][q.attributes[k]], rng_));
    }
    if (rng_.bernoulli(kQueryFillerRate)) query.push_back(filler());
    rng_.shuffle(query);
    p.query = join(std::move(query));

    const std::string category = world_.categories[l.category];
    auto attr = [&](int k) { return world_.attributes[k][l.attributes[k]]; };

    // keyword: one or two attributes then the category
    std::vector<std::string> keyword;
    std::vector<int> slots{0, 1, 2, 3};
    rng_.shuffle(slots);
    const std::size_t n_kw = 1 + rng_.index(2);
    for (std::size_t i = 0; i < n_kw; ++i) keyword.push_back(attr(slots[i]));
    keyword.push_back(category);
    p.listing.keyword = join(std::move(keyword));

    std::vector<std::string> title{surface(category, rng_)};
    for (int k = 0; k < kAttributeSlots; ++k) title.push_back(surface(attr(k), rng_));
    title.push_back(filler());
    rng_.shuffle(title);
    p.listing.ad_title = join(std::move(title));

    // landing page: category, a non-empty attribute subset, fillers
    std::vector<int> lp_slots;
    for (int k = 0; k < kAttributeSlots; ++k) {
      if (rng_.bernoulli(kLpAttributeRate)) lp_slots.push_back(k);
    }
    if (lp_slots.empty()) lp_slots.push_back(static_cast<int>(rng_.index(kAttributeSlots)));
    std::vector<std::string> lp{surface(category, rng_)};
    for (int k : lp_slots) lp.push_back(surface(attr(k), rng_));
    const std::size_t n_fill = 1 + rng_.index(2);
    for (std::size_t i = 0; i < n_fill; ++i) lp.push_back(filler());
    rng_.shuffle(lp);
    p.listing.lp_title = join(std::move(lp));

    int shared = 0;
    for (int k = 0; k < kAttributeSlots; ++k) shared += q.attributes[k] == l.attributes[k];
    const bool category_match = q.category == l.category;
    bool bonus = false;
    for (int k : lp_slots) bonus = bonus || q.attributes[k] == l.attributes[k];
    p.shared_attributes = shared;
    p.latent.overlap = category_match ? 1 + shared : 0;
    p.latent.lp_bonus = category_match && bonus;
    p.label.ac = category_match ? shared : 0;
    p.label.lp = p.label.ac == 0 ? 0 : p.label.ac + (bonus ? 1 : 0);
    return p;
  }

  std::string filler() { return world_.fillers[rng_.index(world_.fillers.size())]; }

  const World& world_;
  Rng rng_;
};

void check_count(std::size_t n, const char* name) {
  if (n == 0) throw ConfigError(std::string("corpus spec: ") + name + " must be > 0");
}

constexpr std::string_view kLabeledHeader = "query\tkeyword\tad_title\tlp_title\tac\tlp";
constexpr std::string_view kUnlabeledHeader = "query\tkeyword\tad_title\tlp_title";
constexpr std::string_view kClickedHeader = "query\tkeyword\tad_title\tlp_title\tclicked";

std::string_view header_for(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::labeled: return kLabeledHeader;
    case DatasetKind::unlabeled: return kUnlabeledHeader;
    case DatasetKind::clicked: return kClickedHeader;
  }
  return kLabeledHeader;
}

void check_text(const std::string& field, const std::filesystem::path& path, std::size_t line,
                const char* column) {
  if (normalize_text(field) != field) {
    bad_row(path, line, std::string("column ") + column + " is not normalized text");
  }
}

// Calls `row(fields, line_number)` for every data row after validating the header.
template <typename RowFn>
void read_tsv(const std::filesystem::path& path, DatasetKind kind, RowFn&& row) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) return;
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header_for(kind)) {
    bad_row(path, line_no, std::string("header does not match ") + dataset_kind_name(kind) +
                               " schema: '" + line + "'");
  }
  const std::size_t n_cols = split_tabs(std::string(header_for(kind))).size();
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != n_cols) {
      bad_row(path, line_no,
              "expected " + std::to_string(n_cols) + " columns, got " +
                  std::to_string(fields.size()));
    }
    if (fields[0].empty()) bad_row(path, line_no, "empty query");
    check_text(fields[0], path, line_no, "query");
    check_text(fields[1], path, line_no, "keyword");
    check_text(fields[2], path, line_no, "ad_title");
    check_text(fields[3], path, line_no, "lp_title");
    row(fields, line_no);
  }
}

}  // namespace

void CorpusSpec::validate() const {
  check_count(n_intents, "n_intents");
  check_count(vocab_size, "vocab_size");
  check_count(n_labeled, "n_labeled");
  check_count(n_unlabeled, "n_unlabeled");
  check_count(n_clicked, "n_clicked");
  check_count(n_test, "n_test");
  if (!(click_noise_rate >= 0.0 && click_noise_rate < 1.0)) {
    throw ConfigError("corpus spec: click_noise_rate must be in [0,1)");
  }
  if (vocab_size < 40) throw ConfigError("corpus spec: vocab_size must be >= 40");
}

Corpus generate_corpus(const CorpusSpec& spec) {
  spec.validate();
  const World world = make_world(spec);
  Corpus c;

  auto labeled_set = [&](std::size_t n, std::string_view stream, std::vector<LabeledSample>& out,
                         std::vector<PairLatent>* latent) {
    PairGenerator gen(world, derive_seed(spec.seed, stream));
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto p = gen.next();
      out.push_back({std::move(p.query), std::move(p.listing), p.label});
      if (latent) latent->push_back(p.latent);
    }
  };
  labeled_set(spec.n_labeled, "labeled", c.labeled, &c.labeled_latent);
  labeled_set(spec.n_test, "test", c.test, nullptr);

  {
    PairGenerator gen(world, derive_seed(spec.seed, "unlabeled"));
    c.unlabeled.reserve(spec.n_unlabeled);
    for (std::size_t i = 0; i < spec.n_unlabeled; ++i) {
      auto p = gen.next();
      c.unlabeled.push_back({std::move(p.query), std::move(p.listing), std::nullopt});
      c.unlabeled_truth.push_back(p.label);
    }
  }
  {
    // Clicks land on relevant pairs, except a noise fraction of irrelevant
    // (AC 0) but lexically similar pairs standing in for false-positive clicks.
    PairGenerator gen(world, derive_seed(spec.seed, "clicked"));
    Rng noise(derive_seed(spec.seed, "click-noise"));
    c.clicked.reserve(spec.n_clicked);
    for (std::size_t i = 0; i < spec.n_clicked; ++i) {
      const bool false_positive = noise.bernoulli(spec.click_noise_rate);
      GeneratedPair p;
      do {
        p = gen.next();
      } while (false_positive ? !(p.label.ac == 0 && p.shared_attributes >= kMinDecoyShared)
                              : p.label.ac < kMinClickedAc);
      c.clicked.push_back({std::move(p.query), std::move(p.listing), true});
      c.clicked_truth.push_back(p.label);
    }
  }
  return c;
}

const char* dataset_kind_name(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::labeled: return "labeled";
    case DatasetKind::unlabeled: return "unlabeled";
    case DatasetKind::clicked: return "clicked";
  }
  return "labeled";
}

DatasetKind parse_dataset_kind(const std::string& name) {
  if (name == "labeled") return DatasetKind::labeled;
  if (name == "unlabeled") return DatasetKind::unlabeled;
  if (name == "clicked") return DatasetKind::clicked;
  throw ConfigError("unknown dataset kind '" + name + "'");
}

void save_labeled(const std::filesystem::path& path, std::span<const LabeledSample> samples) {
  auto out = open_out(path);
  out << kLabeledHeader << '\n';
  for (const auto& s : samples) {
    out << s.query << '\t' << s.listing.keyword << '\t' << s.listing.ad_title << '\t'
        << s.listing.lp_title << '\t' << s.label.ac << '\t' << s.label.lp << '\n';
  }
}

void save_unlabeled(const std::filesystem::path& path, std::span<const UnlabeledPair> pairs,
                    DatasetKind kind) {
  if (kind == DatasetKind::labeled) throw ConfigError("save_unlabeled: kind must not be labeled");
  auto out = open_out(path);
  out << header_for(kind) << '\n';
  for (const auto& p : pairs) {
    out << p.query << '\t' << p.listing.keyword << '\t' << p.listing.ad_title << '\t'
        << p.listing.lp_title;
    if (kind == DatasetKind::clicked) out << '\t' << (p.clicked.value_or(true) ? 1 : 0);
    out << '\n';
  }
}

std::vector<LabeledSample> load_labeled(const std::filesystem::path& path) {
  std::vector<LabeledSample> out;
  read_tsv(path, DatasetKind::labeled, [&](std::vector<std::string>& f, std::size_t line) {
    GradedLabel label{parse_int(f[4], 0, kMaxAcLabel, path, line, "ac"),
                      parse_int(f[5], 0, kMaxLpLabel, path, line, "lp")};
    out.push_back({std::move(f[0]), {std::move(f[1]), std::move(f[2]), std::move(f[3])}, label});
  });
  return out;
}

std::vector<UnlabeledPair> load_unlabeled(const std::filesystem::path& path, DatasetKind kind) {
  if (kind == DatasetKind::labeled) throw ConfigError("load_unlabeled: kind must not be labeled");
  std::vector<UnlabeledPair> out;
  read_tsv(path, kind, [&](std::vector<std::string>& f, std::size_t line) {
    std::optional<bool> clicked;
    if (kind == DatasetKind::clicked) clicked = parse_int(f[4], 0, 1, path, line, "clicked") == 1;
    out.push_back({std::move(f[0]), {std::move(f[1]), std::move(f[2]), std::move(f[3])}, clicked});
  });
  return out;
}

std::pair<std::vector<LabeledSample>, std::vector<LabeledSample>> split_labeled(
    std::span<const LabeledSample> samples, double validation_fraction, std::uint64_t seed) {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("split_labeled: validation fraction must be in (0,1)");
  }
  const std::size_t n = samples.size();
  const auto n_val = static_cast<std::size_t>(std::floor(validation_fraction * static_cast<double>(n)));
  Rng rng(derive_seed(seed, "split"));
  const auto perm = rng.permutation(n);
  std::vector<char> is_val(n, 0);
  for (std::size_t i = 0; i < n_val; ++i) is_val[perm[i]] = 1;
  std::pair<std::vector<LabeledSample>, std::vector<LabeledSample>> out;
  out.first.reserve(n - n_val);
  out.second.reserve(n_val);
  for (std::size_t i = 0; i < n; ++i) (is_val[i] ? out.second : out.first).push_back(samples[i]);
  return out;
}

std::vector<LabeledSample> subsample(std::span<const LabeledSample> samples, double rho,
                                     std::uint64_t seed) {
  if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("subsample: rho must be in (0,1]");
  const std::size_t n = samples.size();
  const auto k = static_cast<std::size_t>(std::llround(rho * static_cast<double>(n)));
  Rng rng(derive_seed(seed, "subsample"));
  auto perm = rng.permutation(n);
  perm.resize(std::min(k, n));
  std::sort(perm.begin(), perm.end());
  std::vector<LabeledSample> out;
  out.reserve(perm.size());
  for (std::size_t i : perm) out.push_back(samples[i]);
  return out;
}

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (unsigned char c : text) {
    if (c == '\t' || c == '\n' || c == '\r') {
      out += ' ';
    } else if (c >= 0x20 && c < 0x7f) {
      out += static_cast<char>(std::tolower(c));
    }
  }
  return out;
}

}  // namespace weakmatch
