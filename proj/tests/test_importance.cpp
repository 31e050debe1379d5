#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "refsel/errors.hpp"
#include "refsel/importance.hpp"

using namespace refsel;

namespace {

// column 0 determines the label; column 1 is noise
EncodedFeatures planted(int n, std::uint64_t seed, std::vector<int>& labels) {
  EncodedFeatures f;
  f.group_names = {"informative", "noise"};
  f.group_ranges = {{0, 1}, {1, 2}};
  f.column_names = {"informative", "noise"};
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    const int y = i % 2;
    f.rows.push_back({static_cast<double>(y), rng.uniform(-1, 1)});
    labels.push_back(y);
  }
  return f;
}

}  // namespace

TEST_CASE("permutation importance of an unused feature is exactly zero") {
  std::vector<int> labels;
  const EncodedFeatures f = planted(120, 1, labels);
  GbdtConfig config;
  config.rounds = 10;
  config.subsample = 1.0;
  const GbdtTrainResult r = train_gbdt(f, labels, 2, config, 2, false);
  // the model solves the task from the informative column alone
  REQUIRE(r.model.used_columns() == std::set<int>{0});

  const PermutationImportance imp = permutation_importance(r.model, f, labels, 5, 3);
  REQUIRE(imp.features.size() == 2);
  CHECK(imp.mean_loss_increase[1] == 0.0);  // untouched feature: exact zero
  CHECK(imp.std_loss_increase[1] == 0.0);
  CHECK(imp.mean_loss_increase[0] > 0.0);
}

TEST_CASE("informative beats noise in at least 95 of 100 seeds") {
  std::vector<int> labels;
  const EncodedFeatures f = planted(300, 4, labels);
  GbdtConfig config;
  config.rounds = 20;
  config.subsample = 1.0;
  const GbdtTrainResult r = train_gbdt(f, labels, 2, config, 5, false);
  int wins = 0;
  for (int seed = 0; seed < 100; ++seed) {
    const PermutationImportance imp = permutation_importance(r.model, f, labels, 1, seed);
    if (imp.mean_loss_increase[0] > imp.mean_loss_increase[1]) ++wins;
  }
  CHECK(wins >= 95);
}

TEST_CASE("grouped one-hot columns permute together") {
  // two one-hot columns of a single categorical feature; a coherent row
  // always has exactly one of them set
  EncodedFeatures f;
  f.group_names = {"cat"};
  f.group_ranges = {{0, 2}};
  f.column_names = {"cat=a", "cat=b"};
  std::vector<int> labels;
  for (int i = 0; i < 60; ++i) {
    const int y = i % 2;
    f.rows.push_back({y == 0 ? 1.0 : 0.0, y == 0 ? 0.0 : 1.0});
    labels.push_back(y);
  }
  GbdtConfig config;
  config.rounds = 5;
  config.subsample = 1.0;
  const GbdtTrainResult r = train_gbdt(f, labels, 2, config, 6, false);
  // permuting the whole group maps rows onto other coherent rows: if the
  // columns moved independently the model would see rows like (1,1)
  const PermutationImportance imp = permutation_importance(r.model, f, labels, 10, 7);
  CHECK(imp.mean_loss_increase[0] > 0.0);
  CHECK(std::isfinite(imp.mean_loss_increase[0]));
}

TEST_CASE("permutation importance validates inputs") {
  std::vector<int> labels;
  const EncodedFeatures f = planted(20, 8, labels);
  GbdtConfig config;
  config.rounds = 2;
  const GbdtTrainResult r = train_gbdt(f, labels, 2, config, 9, false);
  CHECK_THROWS_AS(permutation_importance(r.model, f, labels, 0, 1), ConfigError);
}

TEST_CASE("shapley contributions of a constant model are all zero") {
  std::vector<int> labels;
  EncodedFeatures f = planted(40, 10, labels);
  GbdtConfig config;
  config.rounds = 3;
  config.min_split_loss = 1e9;  // forces single-leaf trees, constant output
  const GbdtTrainResult r = train_gbdt(f, labels, 2, config, 11, false);
  const ShapleyResult s = shapley_sample(r.model, f, f.rows[0], 0, 10, 12);
  for (double c : s.mean_contribution) CHECK(c == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("shapley efficiency: contributions sum to f(x) - mean f(background)") {
  std::vector<int> labels;
  const EncodedFeatures f = planted(80, 13, labels);
  GbdtConfig config;
  config.rounds = 10;
  config.subsample = 1.0;
  const GbdtTrainResult r = train_gbdt(f, labels, 2, config, 14, false);
  const ShapleyResult s = shapley_sample(r.model, f, f.rows[1], 1, 25, 15);
  double sum = 0.0;
  for (double c : s.mean_contribution) sum += c;
  // marginals are averaged over every background row, so the sum telescopes
  CHECK(sum == doctest::Approx(s.instance_value - s.mean_background_value).epsilon(1e-12));
  // and it already holds per ordering
  for (int t = 0; t < s.orderings; ++t) {
    double ordering_sum = 0.0;
    for (std::size_t g = 0; g < s.features.size(); ++g) ordering_sum += s.per_ordering[g][t];
    CHECK(ordering_sum ==
          doctest::Approx(s.instance_value - s.mean_background_value).epsilon(1e-12));
  }
}

TEST_CASE("single-feature model: the feature gets the whole difference for any ordering count") {
  EncodedFeatures f;
  f.group_names = {"only"};
  f.group_ranges = {{0, 1}};
  f.column_names = {"only"};
  std::vector<int> labels;
  for (int i = 0; i < 50; ++i) {
    const int y = i % 2;
    f.rows.push_back({static_cast<double>(y)});
    labels.push_back(y);
  }
  GbdtConfig config;
  config.rounds = 5;
  config.subsample = 1.0;
  const GbdtTrainResult r = train_gbdt(f, labels, 2, config, 16, false);
  for (int orderings : {1, 3, 17}) {
    const ShapleyResult s = shapley_sample(r.model, f, f.rows[0], 0, orderings, 17);
    REQUIRE(s.mean_contribution.size() == 1);
    CHECK(s.mean_contribution[0] ==
          doctest::Approx(s.instance_value - s.mean_background_value).epsilon(1e-15));
  }
}

TEST_CASE("shapley validates inputs") {
  std::vector<int> labels;
  const EncodedFeatures f = planted(20, 18, labels);
  GbdtConfig config;
  config.rounds = 2;
  const GbdtTrainResult r = train_gbdt(f, labels, 2, config, 19, false);
  CHECK_THROWS_AS(shapley_sample(r.model, f, f.rows[0], 0, 0, 1), ConfigError);
  EncodedFeatures empty = f;
  empty.rows.clear();
  CHECK_THROWS_AS(shapley_sample(r.model, empty, f.rows[0], 0, 5, 1), ValidationError);
}
