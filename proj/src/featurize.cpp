#include "weakmatch/featurize.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>

#include "weakmatch/error.hpp"
#include "weakmatch/rng.hpp"

namespace weakmatch {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<std::string> word_trigrams(std::string_view word) {
  const std::string framed = "#" + std::string(word) + "#";
  std::vector<std::string> out;
  for (std::size_t i = 0; i + 3 <= framed.size(); ++i) out.push_back(framed.substr(i, 3));
  return out;
}

TrigramVocab TrigramVocab::build(std::span<const std::string> texts) {
  std::set<std::string> all;
  for (const auto& t : texts) {
    for (const auto& w : tokenize(t)) {
      for (auto& g : word_trigrams(w)) all.insert(std::move(g));
    }
  }
  return from_trigrams({all.begin(), all.end()});
}

TrigramVocab TrigramVocab::from_trigrams(std::vector<std::string> trigrams) {
  std::sort(trigrams.begin(), trigrams.end());
  trigrams.erase(std::unique(trigrams.begin(), trigrams.end()), trigrams.end());
  TrigramVocab v;
  v.trigrams_ = std::move(trigrams);
  for (std::size_t i = 0; i < v.trigrams_.size(); ++i) {
    v.index_.emplace(v.trigrams_[i], static_cast<std::uint32_t>(i));
  }
  return v;
}

std::int64_t TrigramVocab::find(std::string_view trigram) const {
  auto it = index_.find(trigram);
  return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

std::uint64_t TrigramVocab::fingerprint() const {
  std::uint64_t h = fnv1a("trigram-vocab");
  for (const auto& t : trigrams_) h = fnv1a(t + '\n', h);
  return h;
}

void TrigramVocab::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write " + path.string());
  for (std::size_t i = 0; i < trigrams_.size(); ++i) out << trigrams_[i] << '\t' << i << '\n';
}

TrigramVocab TrigramVocab::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open vocab " + path.string());
  std::vector<std::string> trigrams;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.substr(tab + 1) != std::to_string(trigrams.size())) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": expected 'trigram<TAB>" + std::to_string(trigrams.size()) + "'");
    }
    trigrams.push_back(line.substr(0, tab));
  }
  if (!std::is_sorted(trigrams.begin(), trigrams.end())) {
    throw FormatError(path.string() + ": trigrams are not in lexicographic order");
  }
  return from_trigrams(std::move(trigrams));
}

HashedWord hash_word(std::string_view word, const TrigramVocab& vocab) {
  HashedWord out;
  for (const auto& g : word_trigrams(word)) {
    const auto idx = vocab.find(g);
    if (idx < 0) continue;
    const auto i = static_cast<std::uint32_t>(idx);
    auto it = std::lower_bound(out.begin(), out.end(), i,
                               [](const TrigramCount& c, std::uint32_t v) { return c.index < v; });
    if (it != out.end() && it->index == i) {
      ++it->count;
    } else {
      out.insert(it, {i, 1});
    }
  }
  return out;
}

namespace {

std::vector<HashedWord> hash_field(std::string_view text, const TrigramVocab& vocab,
                                   std::size_t max_words) {
  auto words = tokenize(text);
  if (words.size() > max_words) words.resize(max_words);
  std::vector<HashedWord> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(hash_word(w, vocab));
  return out;
}

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::set<std::string_view> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 0.0;
  std::size_t inter = 0;
  for (auto w : sa) inter += sb.count(w);
  return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

std::unordered_map<std::string, double> trigram_bag(const std::vector<std::string>& words) {
  std::unordered_map<std::string, double> bag;
  for (const auto& w : words) {
    for (auto& g : word_trigrams(w)) bag[std::move(g)] += 1.0;
  }
  return bag;
}

double cosine(const std::unordered_map<std::string, double>& a,
              const std::unordered_map<std::string, double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [k, v] : a) {
    na += v * v;
    auto it = b.find(k);
    if (it != b.end()) dot += v * it->second;
  }
  for (const auto& [k, v] : b) nb += v * v;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

double length_ratio(std::size_t a, std::size_t b) {
  const auto hi = std::max(a, b);
  return hi == 0 ? 0.0 : static_cast<double>(std::min(a, b)) / static_cast<double>(hi);
}

}  // namespace

FieldSequences featurize_fields(std::string_view query, const AdListing& listing,
                                const TrigramVocab& vocab, const FieldLimits& limits) {
  return {hash_field(query, vocab, limits.query), hash_field(listing.keyword, vocab, limits.keyword),
          hash_field(listing.ad_title, vocab, limits.ad_title),
          hash_field(listing.lp_title, vocab, limits.lp_title)};
}

LexicalFeatures lexical_features(std::string_view query, const AdListing& listing) {
  const auto q = tokenize(query);
  const auto kw = tokenize(listing.keyword);
  const auto at = tokenize(listing.ad_title);
  const auto lp = tokenize(listing.lp_title);
  std::vector<std::string> all = kw;
  all.insert(all.end(), at.begin(), at.end());
  all.insert(all.end(), lp.begin(), lp.end());

  const auto bq = trigram_bag(q);
  LexicalFeatures f{};
  const std::array<const std::vector<std::string>*, 4> fields{&kw, &at, &lp, &all};
  for (std::size_t i = 0; i < 4; ++i) {
    f[i] = jaccard(q, *fields[i]);
    f[4 + i] = cosine(bq, trigram_bag(*fields[i]));
  }
  f[8] = length_ratio(q.size(), kw.size());
  f[9] = length_ratio(q.size(), at.size());
  f[10] = length_ratio(q.size(), lp.size());
  f[11] = (!q.empty() && q == kw) ? 1.0 : 0.0;
  return f;
}

EncodedPair encode_pair(std::string_view query, const AdListing& listing,
                        const TrigramVocab& vocab, const FieldLimits& limits) {
  return {featurize_fields(query, listing, vocab, limits), lexical_features(query, listing)};
}

}  // namespace weakmatch
