#include "nof1/models/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nof1/errors.hpp"

namespace nof1 {

int ForestConfig::resolved_mtry(ForestKind kind, int p) const {
  if (mtry > 0) return mtry;
  const int m = kind == ForestKind::regression
                    ? p / 3
                    : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p))));
  return std::max(1, m);
}

int ForestConfig::resolved_min_node_size(ForestKind kind) const {
  if (min_node_size > 0) return min_node_size;
  return kind == ForestKind::regression ? 5 : 1;
}

void ForestConfig::validate(int p) const {
  if (n_trees < 1) throw ConfigError("n_trees must be at least 1");
  if (mtry < 0 || mtry > p) {
    throw ConfigError("mtry must lie in [1, " + std::to_string(p) + "] (0 selects the default)");
  }
  if (min_node_size < 0) throw ConfigError("min_node_size must be non-negative");
  if (max_depth < 0) throw ConfigError("max_depth must be non-negative");
}

InBag draw_inbag(std::size_t n_rows, const ForestConfig& cfg) {
  InBag bags(static_cast<std::size_t>(cfg.n_trees), std::vector<int>(n_rows, 0));
  for (int b = 0; b < cfg.n_trees; ++b) {
    auto& bag = bags[static_cast<std::size_t>(b)];
    if (!cfg.bootstrap) {
      std::fill(bag.begin(), bag.end(), 1);
      continue;
    }
    RandomStream rs = cfg.seed.stream("forest.bootstrap", static_cast<std::uint64_t>(b));
    for (std::size_t k = 0; k < n_rows; ++k) ++bag[rs.below(n_rows)];
  }
  return bags;
}

double DecisionTree::predict(std::span<const double> row) const {
  int k = 0;
  while (nodes_[static_cast<std::size_t>(k)].feature >= 0) {
    const auto& nd = nodes_[static_cast<std::size_t>(k)];
    k = row[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
  }
  return nodes_[static_cast<std::size_t>(k)].value;
}

int DecisionTree::depth() const {
  std::vector<int> d(nodes_.size(), 0);
  int best = 0;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const auto& nd = nodes_[k];
    if (nd.feature < 0) continue;
    d[static_cast<std::size_t>(nd.left)] = d[k] + 1;
    d[static_cast<std::size_t>(nd.right)] = d[k] + 1;
    best = std::max(best, d[k] + 1);
  }
  return best;
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& X, std::span<const double> y, ForestKind kind, int mtry,
              int min_node, int max_depth, RandomStream rs)
      : X_(X), y_(y), kind_(kind), mtry_(mtry), min_node_(min_node), max_depth_(max_depth),
        rs_(rs) {}

  DecisionTree build(std::vector<int> samples) {
    nodes_.clear();
    grow(std::move(samples), 0);
    return DecisionTree(std::move(nodes_));
  }

 private:
  double node_value(const std::vector<int>& s) const {
    double sum = 0.0;
    for (int i : s) sum += y_[static_cast<std::size_t>(i)];
    return sum / static_cast<double>(s.size());
  }

  // Larger is better. Regression: S_L^2/n_L + S_R^2/n_R, i.e. the RSS
  // reduction up to a node constant. Classification: sum over sides of
  // (c1^2 + c0^2)/n, i.e. the Gini decrease up to a node constant.
  double side(double sum, double n) const {
    if (kind_ == ForestKind::regression) return sum * sum / n;
    const double c0 = n - sum;
    return (sum * sum + c0 * c0) / n;
  }

  Split best_split(const std::vector<int>& s) {
    const int p = static_cast<int>(X_.cols());
    std::vector<int> feats(static_cast<std::size_t>(p));
    std::iota(feats.begin(), feats.end(), 0);
    // Partial Fisher-Yates: the first mtry entries are the candidate set.
    for (int k = 0; k < mtry_; ++k) {
      const int j = k + static_cast<int>(rs_.below(static_cast<std::uint64_t>(p - k)));
      std::swap(feats[static_cast<std::size_t>(k)], feats[static_cast<std::size_t>(j)]);
    }

    const double n = static_cast<double>(s.size());
    double total = 0.0;
    for (int i : s) total += y_[static_cast<std::size_t>(i)];
    const double parent = side(total, n);

    Split best;
    best.score = parent;
    std::vector<int> order = s;
    for (int k = 0; k < mtry_; ++k) {
      const int f = feats[static_cast<std::size_t>(k)];
      // Sorting by (value, response) makes the scan independent of row order.
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double va = X_(a, f), vb = X_(b, f);
        if (va != vb) return va < vb;
        return y_[static_cast<std::size_t>(a)] < y_[static_cast<std::size_t>(b)];
      });
      double left = 0.0;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        left += y_[static_cast<std::size_t>(order[i])];
        const double v = X_(order[i], f);
        const double next = X_(order[i + 1], f);
        if (v == next) continue;
        const double n_l = static_cast<double>(i + 1);
        const double n_r = n - n_l;
        if (n_l < min_node_ || n_r < min_node_) continue;
        const double sc = side(left, n_l) + side(total - left, n_r);
        if (sc > best.score * (1.0 + 1e-12) + 1e-12) {
          best.feature = f;
          best.threshold = 0.5 * (v + next);
          best.score = sc;
        }
      }
    }
    return best;
  }

  int grow(std::vector<int> s, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(TreeNode{-1, 0.0, -1, -1, node_value(s)});

    const auto [lo, hi] = std::minmax_element(s.begin(), s.end(), [&](int a, int b) {
      return y_[static_cast<std::size_t>(a)] < y_[static_cast<std::size_t>(b)];
    });
    const bool pure = y_[static_cast<std::size_t>(*lo)] == y_[static_cast<std::size_t>(*hi)];
    const bool depth_cap = max_depth_ > 0 && depth >= max_depth_;
    if (pure || depth_cap || static_cast<int>(s.size()) < 2 * min_node_) return id;

    const Split sp = best_split(s);
    if (sp.feature < 0) return id;

    std::vector<int> left, right;
    for (int i : s) (X_(i, sp.feature) <= sp.threshold ? left : right).push_back(i);
    s.clear();
    s.shrink_to_fit();
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    auto& nd = nodes_[static_cast<std::size_t>(id)];
    nd.feature = sp.feature;
    nd.threshold = sp.threshold;
    nd.left = l;
    nd.right = r;
    return id;
  }

  const Eigen::MatrixXd& X_;
  std::span<const double> y_;
  ForestKind kind_;
  int mtry_;
  int min_node_;
  int max_depth_;
  RandomStream rs_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

RandomForest RandomForest::fit(const Eigen::MatrixXd& features, std::span<const double> y,
                               ForestKind kind, const ForestConfig& cfg) {
  return fit(features, y, kind, cfg, draw_inbag(y.size(), cfg));
}

RandomForest RandomForest::fit(const Eigen::MatrixXd& features, std::span<const double> y,
                               ForestKind kind, const ForestConfig& cfg, const InBag& inbag) {
  const int p = static_cast<int>(features.cols());
  if (p == 0) throw EstimatorError("forest needs at least one feature");
  if (static_cast<std::size_t>(features.rows()) != y.size()) {
    throw EstimatorError("response length does not match the feature rows");
  }
  cfg.validate(p);
  if (inbag.size() != static_cast<std::size_t>(cfg.n_trees)) {
    throw EstimatorError("in-bag table does not have one entry per tree");
  }
  if (kind == ForestKind::classification) {
    for (double v : y) {
      if (v != 0.0 && v != 1.0) throw EstimatorError("classification response must be 0 or 1");
    }
  }

  RandomForest forest;
  forest.kind_ = kind;
  forest.n_features_ = p;
  forest.cfg_ = cfg;
  const int mtry = cfg.resolved_mtry(kind, p);
  const int min_node = cfg.resolved_min_node_size(kind);
  forest.trees_.reserve(static_cast<std::size_t>(cfg.n_trees));
  for (int b = 0; b < cfg.n_trees; ++b) {
    const auto& bag = inbag[static_cast<std::size_t>(b)];
    if (bag.size() != y.size()) throw EstimatorError("in-bag row count mismatch");
    std::vector<int> samples;
    samples.reserve(y.size());
    for (std::size_t i = 0; i < bag.size(); ++i) {
      for (int c = 0; c < bag[i]; ++c) samples.push_back(static_cast<int>(i));
    }
    if (samples.empty()) throw EstimatorError("empty in-bag sample for a tree");
    TreeBuilder builder(features, y, kind, mtry, min_node, cfg.max_depth,
                        cfg.seed.stream("forest.features", static_cast<std::uint64_t>(b)));
    forest.trees_.push_back(builder.build(std::move(samples)));
  }
  forest.inbag_ = inbag;
  return forest;
}

double RandomForest::predict(std::span<const double> row) const {
  double s = 0.0;
  for (const auto& t : trees_) s += t.predict(row);
  return s / static_cast<double>(trees_.size());
}

double RandomForest::predict_oob(std::span<const double> row, std::size_t training_row) const {
  double s = 0.0;
  int used = 0;
  for (std::size_t b = 0; b < trees_.size(); ++b) {
    const auto& bag = inbag_[b];
    if (training_row >= bag.size()) throw EstimatorError("out-of-bag row index out of range");
    if (bag[training_row] != 0) continue;
    s += trees_[b].predict(row);
    ++used;
  }
  return used == 0 ? predict(row) : s / static_cast<double>(used);
}

}  // namespace nof1
