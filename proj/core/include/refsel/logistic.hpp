#pragma once

#include <cstdint>
#include <vector>

namespace refsel {

// Multinomial logistic regression trained by full-batch gradient descent
// with backtracking (Armijo) line search; the objective is convex, so the
// loss is non-increasing per iteration and convergence is testable.
// L2 applies to the weights only, never the intercept.
struct LogisticConfig {
  double l2 = 1e-4;
  int max_iterations = 500;
  double gradient_tolerance = 1e-6;  // stop when ||grad||_2 < this
  double init_scale = 0.01;          // 0 gives exact zero init
  bool fit_intercept = true;
  bool standardize = false;  // per-column z-scoring, fitted on training data
};

struct LogisticModel {
  int num_classes = 0;
  int num_features = 0;
  std::vector<std::vector<double>> weights;  // [class][feature]
  std::vector<double> intercept;             // [class]
  std::vector<double> feature_mean, feature_scale;  // standardization, if fitted

  std::vector<double> predict_proba(const std::vector<double>& x) const;
  int predict(const std::vector<double>& x) const;
};

struct LogisticFitInfo {
  std::vector<double> loss_path;  // regularized loss per iteration, including initial
  int iterations = 0;
  double final_gradient_norm = 0.0;
  bool converged = false;
};

LogisticModel train_logistic(const std::vector<std::vector<double>>& features,
                             const std::vector<int>& labels, int num_classes,
                             const LogisticConfig& config, std::uint64_t seed,
                             LogisticFitInfo* info = nullptr);

}  // namespace refsel
