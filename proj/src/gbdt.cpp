#include "weakmatch/gbdt.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "weakmatch/error.hpp"

namespace weakmatch {

namespace {

constexpr double kPriorClamp = 1e-6;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<std::vector<double>>& x, const std::vector<double>& g,
              const std::vector<double>& h, const GbdtConfig& config)
      : x_(x), g_(g), h_(h), config_(config) {}

  Tree build(std::vector<std::size_t> rows) {
    Tree tree;
    grow(tree, std::move(rows), 0);
    return tree;
  }

 private:
  double leaf_value(double G, double H) const {
    const double denom = H + config_.l2;
    return denom > 0.0 ? -G / denom : 0.0;
  }

  double score(double G, double H) const {
    const double denom = H + config_.l2;
    return denom > 0.0 ? G * G / denom : 0.0;
  }

  int grow(Tree& tree, std::vector<std::size_t> rows, std::size_t depth) {
    double G = 0.0, H = 0.0;
    for (auto r : rows) {
      G += g_[r];
      H += h_[r];
    }
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[id].value = leaf_value(G, H);
    if (depth >= config_.max_depth || rows.size() < 2 * config_.min_samples_leaf) return id;

    const Split best = find_split(rows, G, H);
    if (best.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto r : rows) (x_[r][best.feature] < best.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(tree, std::move(left), depth + 1);
    const int rr = grow(tree, std::move(right), depth + 1);
    TreeNode& node = tree.nodes[id];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = l;
    node.right = rr;
    return id;
  }

  Split find_split(const std::vector<std::size_t>& rows, double G, double H) const {
    Split best;
    const double parent = score(G, H);
    const std::size_t n_features = x_[rows[0]].size();
    std::vector<std::size_t> order = rows;
    for (std::size_t f = 0; f < n_features; ++f) {
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return x_[a][f] < x_[b][f]; });
      double GL = 0.0, HL = 0.0;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        GL += g_[order[i]];
        HL += h_[order[i]];
        const double a = x_[order[i]][f], b = x_[order[i + 1]][f];
        if (!(a < b)) continue;
        const std::size_t n_left = i + 1, n_right = order.size() - n_left;
        if (n_left < config_.min_samples_leaf || n_right < config_.min_samples_leaf) continue;
        const double gain = score(GL, HL) + score(G - GL, H - HL) - parent;
        if (gain > best.gain + 1e-12) {
          double thr = a + (b - a) / 2.0;
          if (!(a < thr) || !(thr <= b)) thr = b;
          best = {static_cast<int>(f), thr, gain};
        }
      }
    }
    return best;
  }

  const std::vector<std::vector<double>>& x_;
  const std::vector<double>& g_;
  const std::vector<double>& h_;
  const GbdtConfig& config_;
};

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError(path.string() + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

double Tree::predict(std::span<const double> x) const {
  int id = 0;
  while (!nodes[id].is_leaf()) {
    id = x[nodes[id].feature] < nodes[id].threshold ? nodes[id].left : nodes[id].right;
  }
  return nodes[id].value;
}

std::size_t Tree::depth() const {
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (!nodes[i].is_leaf()) {
      d[nodes[i].left] = d[i] + 1;
      d[nodes[i].right] = d[i] + 1;
    }
  }
  return best;
}

double GbdtModel::margin(std::span<const double> x) const {
  if (x.size() != n_features) {
    throw RuntimeError("gbdt: expected " + std::to_string(n_features) + " features, got " +
                       std::to_string(x.size()));
  }
  double m = 0.0;
  for (const auto& t : trees) m += t.predict(x);
  return base_score + shrinkage * m;
}

double GbdtModel::score(std::span<const double> x) const { return sigmoid(margin(x)); }

void GbdtModel::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write " + path.string());
  out << "weakmatch-gbdt 1\n"
      << "n_features " << n_features << '\n'
      << "base_score " << fmt(base_score) << '\n'
      << "shrinkage " << fmt(shrinkage) << '\n'
      << "trees " << trees.size() << '\n';
  for (std::size_t k = 0; k < trees.size(); ++k) {
    out << "tree " << k << " nodes " << trees[k].nodes.size() << '\n';
    for (const auto& n : trees[k].nodes) {
      out << n.feature << ' ' << fmt(n.threshold) << ' ' << n.left << ' ' << n.right << ' '
          << fmt(n.value) << '\n';
    }
  }
  out << "end\n";
}

GbdtModel GbdtModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open gbdt model " + path.string());
  auto expect = [&](const std::string& key) {
    std::string k;
    if (!(in >> k) || k != key) throw FormatError(path.string() + ": expected '" + key + "'");
  };
  auto word = [&]() {
    std::string w;
    if (!(in >> w)) throw FormatError(path.string() + ": truncated gbdt model");
    return w;
  };
  GbdtModel m;
  expect("weakmatch-gbdt");
  if (word() != "1") throw FormatError(path.string() + ": unsupported gbdt version");
  expect("n_features");
  m.n_features = std::stoul(word());
  expect("base_score");
  m.base_score = parse_double(word(), path);
  expect("shrinkage");
  m.shrinkage = parse_double(word(), path);
  expect("trees");
  const std::size_t n_trees = std::stoul(word());
  for (std::size_t k = 0; k < n_trees; ++k) {
    expect("tree");
    word();
    expect("nodes");
    const std::size_t n_nodes = std::stoul(word());
    Tree t;
    for (std::size_t i = 0; i < n_nodes; ++i) {
      TreeNode n;
      n.feature = std::stoi(word());
      n.threshold = parse_double(word(), path);
      n.left = std::stoi(word());
      n.right = std::stoi(word());
      n.value = parse_double(word(), path);
      const auto limit = static_cast<int>(n_nodes);
      if (!n.is_leaf() && (n.left <= static_cast<int>(i) || n.right <= static_cast<int>(i) ||
                           n.left >= limit || n.right >= limit ||
                           n.feature >= static_cast<int>(m.n_features))) {
        throw FormatError(path.string() + ": malformed node in tree " + std::to_string(k));
      }
      t.nodes.push_back(n);
    }
    m.trees.push_back(std::move(t));
  }
  expect("end");
  return m;
}

double log_loss(std::span<const double> probabilities, std::span<const int> labels) {
  double s = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p = std::clamp(probabilities[i], 1e-15, 1.0 - 1e-15);
    s -= labels[i] ? std::log(p) : std::log(1.0 - p);
  }
  return labels.empty() ? 0.0 : s / static_cast<double>(labels.size());
}

GbdtTrainResult gbdt_train(const std::vector<std::vector<double>>& features,
                           std::span<const int> labels, const GbdtConfig& config) {
  if (features.size() != labels.size()) throw RuntimeError("gbdt_train: feature/label count mismatch");
  if (features.empty()) throw RuntimeError("gbdt_train: empty training set");
  const std::size_t n = features.size();
  const std::size_t d = features[0].size();
  for (const auto& row : features) {
    if (row.size() != d) throw RuntimeError("gbdt_train: ragged feature rows");
  }
  GbdtTrainResult result;
  GbdtModel& m = result.model;
  m.n_features = d;
  m.shrinkage = config.shrinkage;

  const double positives = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  const double prior = std::clamp(positives / static_cast<double>(n), kPriorClamp, 1.0 - kPriorClamp);
  m.base_score = std::log(prior / (1.0 - prior));
  result.degenerate = positives == 0.0 || positives == static_cast<double>(n);

  std::vector<double> margin(n, m.base_score), p(n), g(n), h(n);
  auto refresh = [&]() {
    for (std::size_t i = 0; i < n; ++i) p[i] = sigmoid(margin[i]);
    result.loss_trace.push_back(log_loss(p, labels));
  };
  refresh();
  if (result.degenerate) return result;

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  for (std::size_t t = 0; t < config.n_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = p[i] - labels[i];
      h[i] = p[i] * (1.0 - p[i]);
    }
    Tree tree = TreeBuilder(features, g, h, config).build(all);
    for (std::size_t i = 0; i < n; ++i) margin[i] += config.shrinkage * tree.predict(features[i]);
    m.trees.push_back(std::move(tree));
    refresh();
  }
  return result;
}

}  // namespace weakmatch
