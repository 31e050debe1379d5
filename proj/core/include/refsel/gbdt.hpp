#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "refsel/features.hpp"
#include "refsel/metrics.hpp"

namespace refsel {

// Feature matrix for the tree baseline. Categorical fields are one-hot
// encoded; dist_ant_w and sent_1 stay ordinal. Columns of one source
// feature form a group, which permutation importance and Shapley sampling
// treat as a unit.
struct EncodedFeatures {
  std::vector<std::string> group_names;
  std::vector<std::pair<int, int>> group_ranges;  // [begin, end) columns
  std::vector<std::string> column_names;
  std::vector<std::vector<double>> rows;

  int num_columns() const { return static_cast<int>(column_names.size()); }
};

// The eight probing features.
std::vector<std::string> probing_feature_set();
// Baseline feature set per scheme: syn, entity_type, gender, dis_stat,
// dist_ant, sent_1, meta_pro, glo_pro always; sen_stat except 2-way;
// dist_ant_w except 3-way.
std::vector<std::string> baseline_feature_set(SchemeArity scheme);

EncodedFeatures encode_features(const FeatureTable& table,
                                const std::vector<std::string>& feature_names);

// Gradient-boosted trees: one regression tree per class per round with
// softmax coupling. Split gain is the second-order score improvement
//   0.5 * (GL^2/(HL+l2) + GR^2/(HR+l2) - G^2/(H+l2))
// and a node splits only when the gain reaches min_split_loss.
struct GbdtConfig {
  double learning_rate = 0.05;
  double min_split_loss = 0.01;
  int max_depth = 5;
  double subsample = 0.5;  // per-tree row sampling, without replacement
  int rounds = 50;
  int folds = 5;
  double leaf_l2 = 1e-6;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double leaf_value = 0.0;
  double gain = 0.0;  // realized split gain

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // node 0 is the root

  double predict(const std::vector<double>& row) const;
  int depth() const;  // edges on the longest root-to-leaf path
  void collect_used_features(std::set<int>& out) const;
  void collect_gains(std::vector<double>& out) const;
};

struct GbdtModel {
  int num_classes = 0;
  double learning_rate = 0.0;
  std::vector<std::vector<Tree>> rounds;  // [round][class]

  std::vector<double> predict_scores(const std::vector<double>& row) const;
  std::vector<double> predict_proba(const std::vector<double>& row) const;
  int predict(const std::vector<double>& row) const;
  std::set<int> used_columns() const;
  int max_tree_depth() const;
  // Smallest realized split gain; +inf when no node ever split.
  double min_realized_gain() const;
};

struct FoldMetrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double log_loss = 0.0;
};

struct CvMetrics {
  std::vector<FoldMetrics> per_fold;
  FoldMetrics mean;
};

struct GbdtTrainResult {
  GbdtModel model;  // trained on the full training data
  std::vector<double> train_log_loss;  // after each round
  CvMetrics cv;     // stratified k-fold; empty when run_cv is false
};

GbdtTrainResult train_gbdt(const EncodedFeatures& features, const std::vector<int>& labels,
                           int num_classes, const GbdtConfig& config, std::uint64_t seed,
                           bool run_cv = true);

}  // namespace refsel
