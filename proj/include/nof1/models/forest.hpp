#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nof1/rng.hpp"

namespace nof1 {

enum class ForestKind { regression, classification };

/// Zero means "use the kind's conventional default":
///   mtry          floor(p/3) for regression, ceil(sqrt(p)) for classification, min 1
///   min_node_size 5 for regression, 1 for classification
struct ForestConfig {
  int n_trees = 500;
  int mtry = 0;
  int min_node_size = 0;
  int max_depth = 0;        // 0 = unlimited
  bool bootstrap = true;    // n draws with replacement per tree
  SeedSpec seed{};

  int resolved_mtry(ForestKind kind, int p) const;
  int resolved_min_node_size(ForestKind kind) const;
  void validate(int p) const;
};

/// In-bag multiplicities: inbag[b][i] is how often row i appears in tree b's
/// sample. Tree b draws n row positions from stream seed("forest.bootstrap", b),
/// so permuting rows while carrying each row's count along reproduces the
/// same trees.
using InBag = std::vector<std::vector<int>>;
InBag draw_inbag(std::size_t n_rows, const ForestConfig& cfg);

struct TreeNode {
  int feature = -1;     // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;   // leaf mean (regression) or class-1 share (classification)
};

class DecisionTree {
 public:
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}
  double predict(std::span<const double> row) const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  int depth() const;

 private:
  std::vector<TreeNode> nodes_;
};

/// Bagged CART. Regression nodes split on squared-error reduction,
/// classification nodes on Gini decrease; each split considers mtry features
/// drawn without replacement. A split must leave at least min_node_size
/// samples on each side. Thresholds sit midway between adjacent distinct
/// values, and rows go left when value <= threshold.
class RandomForest {
 public:
  static RandomForest fit(const Eigen::MatrixXd& features, std::span<const double> y,
                          ForestKind kind, const ForestConfig& cfg);
  static RandomForest fit(const Eigen::MatrixXd& features, std::span<const double> y,
                          ForestKind kind, const ForestConfig& cfg, const InBag& inbag);

  double predict(std::span<const double> row) const;
  /// Out-of-bag prediction for training row `training_row`: the average over
  /// trees whose bootstrap sample left that row out. Falls back to predict()
  /// when every tree saw the row.
  double predict_oob(std::span<const double> row, std::size_t training_row) const;
  ForestKind kind() const { return kind_; }
  const InBag& inbag() const { return inbag_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }
  int n_features() const { return n_features_; }
  const ForestConfig& config() const { return cfg_; }

 private:
  ForestKind kind_ = ForestKind::regression;
  int n_features_ = 0;
  ForestConfig cfg_{};
  std::vector<DecisionTree> trees_;
  InBag inbag_;
};

}  // namespace nof1
