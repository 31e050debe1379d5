#include "refsel/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "refsel/errors.hpp"
#include "refsel/seeding.hpp"

namespace refsel {

namespace {

struct FeatureSpec {
  std::string name;
  std::vector<std::string> values;  // one-hot categories; empty = ordinal
  double (*ordinal)(const FeatureVector&) = nullptr;
  int (*categorical)(const FeatureVector&) = nullptr;
};

const std::vector<FeatureSpec>& feature_specs() {
  static const std::vector<FeatureSpec> specs = {
      {"dis_stat",
       {"discourse_new", "discourse_old"},
       nullptr,
       [](const FeatureVector& f) { return static_cast<int>(f.dis_stat); }},
      {"sen_stat",
       {"sentence_new", "sentence_old"},
       nullptr,
       [](const FeatureVector& f) { return static_cast<int>(f.sen_stat); }},
      {"syn",
       {"subject", "object"},
       nullptr,
       [](const FeatureVector& f) { return static_cast<int>(f.syn); }},
      {"dist_ant",
       {"same_sentence", "one_away", "more_than_one", "first_mention"},
       nullptr,
       [](const FeatureVector& f) { return static_cast<int>(f.dist_ant); }},
      {"int_ref",
       {"first_mention", "previous_same", "previous_different"},
       nullptr,
       [](const FeatureVector& f) { return static_cast<int>(f.int_ref); }},
      {"loc_pro",
       {"not_prominent", "prominent"},
       nullptr,
       [](const FeatureVector& f) { return static_cast<int>(f.loc_pro); }},
      {"glo_pro",
       {"not_prominent", "prominent"},
       nullptr,
       [](const FeatureVector& f) { return static_cast<int>(f.glo_pro); }},
      {"meta_pro",
       {"b0_50", "b50_150", "b150_290", "b290_inf"},
       nullptr,
       [](const FeatureVector& f) { return static_cast<int>(f.meta_pro); }},
      {"dist_ant_w",
       {},
       [](const FeatureVector& f) { return static_cast<double>(f.dist_ant_w); },
       nullptr},
      {"sent_1",
       {},
       [](const FeatureVector& f) { return f.sent_1 ? 1.0 : 0.0; },
       nullptr},
      {"entity_type",
       {"Person", "Organisation", "Location", "Number", "Other"},
       nullptr,
       [](const FeatureVector& f) { return static_cast<int>(f.entity_type); }},
      {"gender",
       {"male", "female", "other"},
       nullptr,
       [](const FeatureVector& f) { return static_cast<int>(f.gender); }},
  };
  return specs;
}

const FeatureSpec& spec_by_name(const std::string& name) {
  for (const FeatureSpec& s : feature_specs())
    if (s.name == name) return s;
  throw ConfigError("unknown feature: " + name);
}

}  // namespace

std::vector<std::string> probing_feature_set() {
  return {"dis_stat", "sen_stat", "syn", "dist_ant", "int_ref", "loc_pro", "glo_pro", "meta_pro"};
}

std::vector<std::string> baseline_feature_set(SchemeArity scheme) {
  std::vector<std::string> names = {"syn", "entity_type", "gender", "dis_stat"};
  if (scheme != SchemeArity::two_way) names.push_back("sen_stat");
  names.push_back("dist_ant");
  if (scheme != SchemeArity::three_way) names.push_back("dist_ant_w");
  names.push_back("sent_1");
  names.push_back("meta_pro");
  names.push_back("glo_pro");
  return names;
}

EncodedFeatures encode_features(const FeatureTable& table,
                                const std::vector<std::string>& feature_names) {
  EncodedFeatures out;
  for (const std::string& name : feature_names) {
    const FeatureSpec& spec = spec_by_name(name);
    const int begin = out.num_columns();
    if (spec.values.empty()) {
      out.column_names.push_back(name);
    } else {
      for (const std::string& v : spec.values) out.column_names.push_back(name + "=" + v);
    }
    out.group_names.push_back(name);
    out.group_ranges.emplace_back(begin, out.num_columns());
  }
  out.rows.reserve(table.rows.size());
  for (const FeatureVector& fv : table.rows) {
    std::vector<double> row(out.num_columns(), 0.0);
    int col = 0;
    for (const std::string& name : feature_names) {
      const FeatureSpec& spec = spec_by_name(name);
      if (spec.values.empty()) {
        row[col++] = spec.ordinal(fv);
      } else {
        row[col + spec.categorical(fv)] = 1.0;
        col += static_cast<int>(spec.values.size());
      }
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

double Tree::predict(const std::vector<double>& row) const {
  int node = 0;
  while (!nodes[node].is_leaf())
    node = row[nodes[node].feature] <= nodes[node].threshold ? nodes[node].left
                                                             : nodes[node].right;
  return nodes[node].leaf_value;
}

int Tree::depth() const {
  std::vector<std::pair<int, int>> stack = {{0, 0}};
  int deepest = 0;
  while (!stack.empty()) {
    auto [node, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes[node].is_leaf()) {
      stack.push_back({nodes[node].left, d + 1});
      stack.push_back({nodes[node].right, d + 1});
    }
  }
  return deepest;
}

void Tree::collect_used_features(std::set<int>& out) const {
  for (const TreeNode& n : nodes)
    if (!n.is_leaf()) out.insert(n.feature);
}

void Tree::collect_gains(std::vector<double>& out) const {
  for (const TreeNode& n : nodes)
    if (!n.is_leaf()) out.push_back(n.gain);
}

std::vector<double> GbdtModel::predict_scores(const std::vector<double>& row) const {
  std::vector<double> scores(num_classes, 0.0);
  for (const auto& round : rounds)
    for (int k = 0; k < num_classes; ++k) scores[k] += learning_rate * round[k].predict(row);
  return scores;
}

std::vector<double> GbdtModel::predict_proba(const std::vector<double>& row) const {
  std::vector<double> s = predict_scores(row);
  const double hi = *std::max_element(s.begin(), s.end());
  double sum = 0.0;
  for (double& v : s) {
    v = std::exp(v - hi);
    sum += v;
  }
  for (double& v : s) v /= sum;
  return s;
}

int GbdtModel::predict(const std::vector<double>& row) const {
  const std::vector<double> p = predict_scores(row);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

std::set<int> GbdtModel::used_columns() const {
  std::set<int> used;
  for (const auto& round : rounds)
    for (const Tree& t : round) t.collect_used_features(used);
  return used;
}

int GbdtModel::max_tree_depth() const {
  int deepest = 0;
  for (const auto& round : rounds)
    for (const Tree& t : round) deepest = std::max(deepest, t.depth());
  return deepest;
}

double GbdtModel::min_realized_gain() const {
  std::vector<double> gains;
  for (const auto& round : rounds)
    for (const Tree& t : round) t.collect_gains(gains);
  if (gains.empty()) return std::numeric_limits<double>::infinity();
  return *std::min_element(gains.begin(), gains.end());
}

namespace {

struct TreeBuilder {
  const std::vector<std::vector<double>>& x;
  const std::vector<double>& grad;
  const std::vector<double>& hess;
  const GbdtConfig& config;
  Tree tree;

  int build(std::vector<int> indices, int depth) {
    double g_sum = 0.0, h_sum = 0.0;
    for (int i : indices) {
      g_sum += grad[i];
      h_sum += hess[i];
    }
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[node_id].leaf_value = -g_sum / (h_sum + config.leaf_l2);

    if (depth >= config.max_depth || indices.size() < 2) return node_id;

    const int num_cols = static_cast<int>(x[0].size());
    const double parent_score = g_sum * g_sum / (h_sum + config.leaf_l2);
    double best_gain = 0.0;
    int best_col = -1;
    double best_threshold = 0.0;

    std::vector<std::pair<double, int>> sorted;
    sorted.reserve(indices.size());
    for (int col = 0; col < num_cols; ++col) {
      sorted.clear();
      for (int i : indices) sorted.emplace_back(x[i][col], i);
      std::sort(sorted.begin(), sorted.end());
      if (sorted.front().first == sorted.back().first) continue;
      double gl = 0.0, hl = 0.0;
      for (std::size_t p = 0; p + 1 < sorted.size(); ++p) {
        gl += grad[sorted[p].second];
        hl += hess[sorted[p].second];
        if (sorted[p].first == sorted[p + 1].first) continue;
        const double gr = g_sum - gl, hr = h_sum - hl;
        const double gain = 0.5 * (gl * gl / (hl + config.leaf_l2) +
                                   gr * gr / (hr + config.leaf_l2) - parent_score);
        if (gain > best_gain) {
          best_gain = gain;
          best_col = col;
          best_threshold = 0.5 * (sorted[p].first + sorted[p + 1].first);
        }
      }
    }

    if (best_col < 0 || best_gain < config.min_split_loss) return node_id;

    std::vector<int> left, right;
    for (int i : indices)
      (x[i][best_col] <= best_threshold ? left : right).push_back(i);
    indices.clear();
    indices.shrink_to_fit();

    const int left_id = build(std::move(left), depth + 1);
    const int right_id = build(std::move(right), depth + 1);
    tree.nodes[node_id].feature = best_col;
    tree.nodes[node_id].threshold = best_threshold;
    tree.nodes[node_id].gain = best_gain;
    tree.nodes[node_id].left = left_id;
    tree.nodes[node_id].right = right_id;
    return node_id;
  }
};

GbdtModel fit_boosted(const std::vector<std::vector<double>>& x, const std::vector<int>& labels,
                      int num_classes, const GbdtConfig& config, std::uint64_t seed,
                      std::vector<double>* log_loss_path) {
  const int n = static_cast<int>(x.size());
  GbdtModel model;
  model.num_classes = num_classes;
  model.learning_rate = config.learning_rate;

  std::vector<std::vector<double>> scores(n, std::vector<double>(num_classes, 0.0));
  std::vector<double> grad(n), hess(n);
  std::vector<std::vector<double>> probs(n, std::vector<double>(num_classes, 0.0));

  for (int round = 0; round < config.rounds; ++round) {
    for (int i = 0; i < n; ++i) {
      const double hi = *std::max_element(scores[i].begin(), scores[i].end());
      double sum = 0.0;
      for (int k = 0; k < num_classes; ++k) {
        probs[i][k] = std::exp(scores[i][k] - hi);
        sum += probs[i][k];
      }
      for (int k = 0; k < num_classes; ++k) probs[i][k] /= sum;
    }

    model.rounds.emplace_back();
    for (int k = 0; k < num_classes; ++k) {
      for (int i = 0; i < n; ++i) {
        const double p = probs[i][k];
        grad[i] = p - (labels[i] == k ? 1.0 : 0.0);
        hess[i] = p * (1.0 - p);
      }
      std::vector<int> rows;
      if (config.subsample >= 1.0) {
        rows.resize(n);
        std::iota(rows.begin(), rows.end(), 0);
      } else {
        Rng rng(derive_seed(seed, "gbdt.subsample", static_cast<std::uint64_t>(round) * num_classes + k));
        std::vector<int> perm = rng.permutation(n);
        const int take = std::max(1, static_cast<int>(config.subsample * n));
        rows.assign(perm.begin(), perm.begin() + take);
        std::sort(rows.begin(), rows.end());
      }
      TreeBuilder builder{x, grad, hess, config, {}};
      builder.build(std::move(rows), 0);
      model.rounds.back().push_back(std::move(builder.tree));
    }

    for (int i = 0; i < n; ++i)
      for (int k = 0; k < num_classes; ++k)
        scores[i][k] += config.learning_rate * model.rounds.back()[k].predict(x[i]);

    if (log_loss_path) {
      double loss = 0.0;
      for (int i = 0; i < n; ++i) {
        const double hi = *std::max_element(scores[i].begin(), scores[i].end());
        double sum = 0.0;
        for (int k = 0; k < num_classes; ++k) sum += std::exp(scores[i][k] - hi);
        loss += -(scores[i][labels[i]] - hi - std::log(sum));
      }
      log_loss_path->push_back(loss / n);
    }
  }
  return model;
}

FoldMetrics eval_fold(const GbdtModel& model, const std::vector<std::vector<double>>& x,
                      const std::vector<int>& labels, int num_classes) {
  std::vector<int> predicted;
  std::vector<std::vector<double>> proba;
  predicted.reserve(x.size());
  proba.reserve(x.size());
  for (const auto& row : x) {
    proba.push_back(model.predict_proba(row));
    predicted.push_back(static_cast<int>(
        std::max_element(proba.back().begin(), proba.back().end()) - proba.back().begin()));
  }
  const EvalMetrics m =
      evaluate_predictions(labels, predicted, std::vector<std::string>(num_classes, ""));
  return {m.accuracy, m.macro_f1, multiclass_log_loss(labels, proba)};
}

}  // namespace

GbdtTrainResult train_gbdt(const EncodedFeatures& features, const std::vector<int>& labels,
                           int num_classes, const GbdtConfig& config, std::uint64_t seed,
                           bool run_cv) {
  if (features.rows.empty() || features.rows.size() != labels.size())
    throw ValidationError("gbdt: empty or mismatched training data");
  if (num_classes < 2) throw ValidationError("gbdt: need at least 2 classes");
  if (config.learning_rate <= 0.0) throw ConfigError("gbdt: learning_rate must be positive");
  if (config.max_depth < 1) throw ConfigError("gbdt: max_depth must be at least 1");
  if (config.subsample <= 0.0 || config.subsample > 1.0)
    throw ConfigError("gbdt: subsample must be in (0,1]");
  if (config.rounds < 1) throw ConfigError("gbdt: rounds must be at least 1");
  for (const auto& row : features.rows)
    for (double v : row)
      if (!std::isfinite(v)) throw ValidationError("gbdt: non-finite feature encoding");
  for (int y : labels)
    if (y < 0 || y >= num_classes) throw ValidationError("gbdt: label out of range");

  GbdtTrainResult result;
  result.model = fit_boosted(features.rows, labels, num_classes, config,
                             derive_seed(seed, "gbdt.full"), &result.train_log_loss);

  if (run_cv) {
    if (config.folds < 2) throw ConfigError("gbdt: folds must be at least 2");
    const int n = static_cast<int>(labels.size());
    if (n < config.folds) throw ValidationError("gbdt: fewer rows than folds");
    // stratified fold assignment: seeded shuffle within each label
    std::vector<int> fold_of(n, 0);
    Rng rng(derive_seed(seed, "gbdt.folds"));
    for (int k = 0; k < num_classes; ++k) {
      std::vector<int> members;
      for (int i = 0; i < n; ++i)
        if (labels[i] == k) members.push_back(i);
      rng.shuffle(members);
      for (std::size_t j = 0; j < members.size(); ++j)
        fold_of[members[j]] = static_cast<int>(j % config.folds);
    }
    for (int f = 0; f < config.folds; ++f) {
      std::vector<std::vector<double>> train_x, test_x;
      std::vector<int> train_y, test_y;
      for (int i = 0; i < n; ++i) {
        if (fold_of[i] == f) {
          test_x.push_back(features.rows[i]);
          test_y.push_back(labels[i]);
        } else {
          train_x.push_back(features.rows[i]);
          train_y.push_back(labels[i]);
        }
      }
      if (test_x.empty()) throw ValidationError("gbdt: empty cross-validation fold");
      std::set<int> present(train_y.begin(), train_y.end());
      if (present.size() < 2)
        throw ValidationError("gbdt: degenerate single-class cross-validation fold");
      const GbdtModel fold_model = fit_boosted(train_x, train_y, num_classes, config,
                                               derive_seed(seed, "gbdt.fold", f), nullptr);
      result.cv.per_fold.push_back(eval_fold(fold_model, test_x, test_y, num_classes));
    }
    for (const FoldMetrics& m : result.cv.per_fold) {
      result.cv.mean.accuracy += m.accuracy;
      result.cv.mean.macro_f1 += m.macro_f1;
      result.cv.mean.log_loss += m.log_loss;
    }
    result.cv.mean.accuracy /= config.folds;
    result.cv.mean.macro_f1 /= config.folds;
    result.cv.mean.log_loss /= config.folds;
  }
  return result;
}

}  // namespace refsel
