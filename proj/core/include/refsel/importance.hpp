#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "refsel/gbdt.hpp"

namespace refsel {

// Model-agnostic variable importance for the tree baseline: permutation
// importance (held-out loss increase when one feature group is shuffled)
// and Monte-Carlo Shapley contributions over random feature orderings.

struct PermutationImportance {
  std::vector<std::string> features;  // group names
  std::vector<double> mean_loss_increase;
  std::vector<double> std_loss_increase;
  double baseline_loss = 0.0;
  int repetitions = 0;
};

// One-hot columns of a categorical feature permute together, preserving
// feature-level semantics. Repetitions carry per-task seeds and may run
// in parallel (`jobs`) without changing the result.
PermutationImportance permutation_importance(const GbdtModel& model,
                                             const EncodedFeatures& features,
                                             const std::vector<int>& labels, int repetitions,
                                             std::uint64_t seed, int jobs = 1);

struct ShapleyResult {
  std::vector<std::string> features;
  std::vector<double> mean_contribution;
  std::vector<std::vector<double>> per_ordering;  // [feature][ordering]
  double instance_value = 0.0;         // f(instance)
  double mean_background_value = 0.0;  // mean f over the background rows
  int explained_class = 0;
  int orderings = 0;
};

// For each sampled ordering, marginal contributions are averaged over every
// background row, so the contributions of one ordering sum exactly to
// f(instance) - mean f(background). f is the predicted probability of
// explained_class (pass -1 for the model's own prediction).
ShapleyResult shapley_sample(const GbdtModel& model, const EncodedFeatures& background,
                             const std::vector<double>& instance, int explained_class,
                             int orderings, std::uint64_t seed);

}  // namespace refsel
