#include "refsel/importance.hpp"

#include <algorithm>
#include <cmath>

#include "refsel/errors.hpp"
#include "refsel/parallel.hpp"
#include "refsel/seeding.hpp"

namespace refsel {

namespace {

double model_log_loss(const GbdtModel& model, const std::vector<std::vector<double>>& rows,
                      const std::vector<int>& labels) {
  std::vector<std::vector<double>> proba;
  proba.reserve(rows.size());
  for (const auto& row : rows) proba.push_back(model.predict_proba(row));
  return multiclass_log_loss(labels, proba);
}

}  // namespace

PermutationImportance permutation_importance(const GbdtModel& model,
                                             const EncodedFeatures& features,
                                             const std::vector<int>& labels, int repetitions,
                                             std::uint64_t seed, int jobs) {
  if (repetitions < 1) throw ConfigError("permutation_importance: repetitions must be >= 1");
  if (features.rows.empty() || features.rows.size() != labels.size())
    throw ValidationError("permutation_importance: empty or mismatched data");

  PermutationImportance out;
  out.repetitions = repetitions;
  out.baseline_loss = model_log_loss(model, features.rows, labels);

  const int n = static_cast<int>(features.rows.size());
  const std::size_t groups = features.group_names.size();
  // (group, repetition) tasks are independent; seeds are per-task
  std::vector<double> increases(groups * repetitions, 0.0);
  parallel_for(groups * repetitions, jobs, [&](std::size_t task) {
    const std::size_t g = task / repetitions;
    const int rep = static_cast<int>(task % repetitions);
    const auto [col_begin, col_end] = features.group_ranges[g];
    Rng rng(derive_seed(seed, "perm." + features.group_names[g], rep));
    const std::vector<int> perm = rng.permutation(n);
    std::vector<std::vector<double>> shuffled = features.rows;
    for (int i = 0; i < n; ++i)
      for (int c = col_begin; c < col_end; ++c) shuffled[i][c] = features.rows[perm[i]][c];
    increases[task] = model_log_loss(model, shuffled, labels) - out.baseline_loss;
  });

  for (std::size_t g = 0; g < groups; ++g) {
    double sum = 0.0, sum_sq = 0.0;
    for (int rep = 0; rep < repetitions; ++rep) {
      const double inc = increases[g * repetitions + rep];
      sum += inc;
      sum_sq += inc * inc;
    }
    const double mean = sum / repetitions;
    const double variance = std::max(0.0, sum_sq / repetitions - mean * mean);
    out.features.push_back(features.group_names[g]);
    out.mean_loss_increase.push_back(mean);
    out.std_loss_increase.push_back(std::sqrt(variance));
  }
  return out;
}

ShapleyResult shapley_sample(const GbdtModel& model, const EncodedFeatures& background,
                             const std::vector<double>& instance, int explained_class,
                             int orderings, std::uint64_t seed) {
  if (orderings < 1) throw ConfigError("shapley_sample: orderings must be >= 1");
  if (background.rows.empty()) throw ValidationError("shapley_sample: empty background");
  if (static_cast<int>(instance.size()) != background.num_columns())
    throw ValidationError("shapley_sample: instance width mismatch");

  const int num_groups = static_cast<int>(background.group_names.size());
  ShapleyResult out;
  out.features = background.group_names;
  out.orderings = orderings;
  out.explained_class = explained_class < 0 ? model.predict(instance) : explained_class;
  if (out.explained_class >= model.num_classes)
    throw ValidationError("shapley_sample: explained class out of range");

  auto f = [&](const std::vector<double>& row) {
    return model.predict_proba(row)[out.explained_class];
  };

  out.instance_value = f(instance);
  for (const auto& row : background.rows) out.mean_background_value += f(row);
  out.mean_background_value /= background.rows.size();

  out.per_ordering.assign(num_groups, std::vector<double>(orderings, 0.0));
  Rng rng(derive_seed(seed, "shapley.orderings"));
  for (int t = 0; t < orderings; ++t) {
    std::vector<int> order(num_groups);
    for (int g = 0; g < num_groups; ++g) order[g] = g;
    rng.shuffle(order);
    for (const auto& base : background.rows) {
      std::vector<double> z = base;
      double prev = f(z);
      for (int g : order) {
        const auto [col_begin, col_end] = background.group_ranges[g];
        for (int c = col_begin; c < col_end; ++c) z[c] = instance[c];
        const double cur = f(z);
        out.per_ordering[g][t] += cur - prev;
        prev = cur;
      }
    }
    for (int g = 0; g < num_groups; ++g)
      out.per_ordering[g][t] /= static_cast<double>(background.rows.size());
  }

  out.mean_contribution.assign(num_groups, 0.0);
  for (int g = 0; g < num_groups; ++g) {
    for (int t = 0; t < orderings; ++t) out.mean_contribution[g] += out.per_ordering[g][t];
    out.mean_contribution[g] /= orderings;
  }
  return out;
}

}  // namespace refsel
