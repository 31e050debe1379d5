#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "refsel/features.hpp"
#include "refsel/logistic.hpp"
#include "refsel/metrics.hpp"
#include "refsel/models.hpp"

namespace refsel {

// Diagnostic probes: a logistic classifier per linguistic feature, trained
// on frozen model representations. Eight tasks, each reading one
// FeatureVector field.

struct ProbeTask {
  std::string name;
  int num_classes = 0;
  std::vector<std::string> class_names;
  int (*label_of)(const FeatureVector&) = nullptr;
};

// DisStat, SenStat, Syn, DistAnt, IntRef, LocPro, GloPro, MetaPro
// with class counts 2, 2, 2, 4, 3, 2, 2, 4.
const std::vector<ProbeTask>& probe_tasks();
const ProbeTask& probe_task(const std::string& name);

std::vector<int> task_labels(const ProbeTask& task, const FeatureTable& table);

struct BaselineScores {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

// Random: uniform over the task's classes, seeded. Majority: most frequent
// training label applied to every evaluation input.
BaselineScores random_baseline(const std::vector<int>& eval_labels, int num_classes,
                               std::uint64_t seed);
BaselineScores majority_baseline(const std::vector<int>& train_labels,
                                 const std::vector<int>& eval_labels, int num_classes);
int majority_class(const std::vector<int>& labels, int num_classes);

struct ProbeConfig {
  LogisticConfig logistic;
  int trainings = 5;  // probes per task, averaged
  bool eval_on_train = false;  // probe train/eval split choice
  bool control_shuffled = false;   // extra probe on shuffled training labels
  bool control_untrained = false;  // extra probe on an untrained model's representations
  bool counts_train_only = false;  // meta_pro counting population (default: whole corpus)
  int jobs = 1;
};

struct ProbeScores {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<double> per_seed_accuracy;
  std::vector<double> per_seed_macro_f1;
};

struct TaskReport {
  std::string task;
  int num_classes = 0;
  BaselineScores random;
  BaselineScores majority;
  ProbeScores probe;
  ProbeScores control_shuffled;   // populated when requested
  ProbeScores control_untrained;  // populated when requested
};

struct ProbeReport {
  std::vector<TaskReport> tasks;
  bool has_shuffled_control = false;
  bool has_untrained_control = false;
};

// Representations: training split fits the probe, test split scores it
// (eval_on_train flips that). Feature tables supply the task labels.
ProbeReport run_probe_suite(const TrainedModel& model, const Corpus& corpus,
                            const ProbeConfig& config, std::uint64_t seed);

// Single-task paths, exposed for tests and the CLI.
ProbeScores train_and_score_probe(const std::vector<std::vector<double>>& train_reps,
                                  const std::vector<int>& train_labels,
                                  const std::vector<std::vector<double>>& eval_reps,
                                  const std::vector<int>& eval_labels, int num_classes,
                                  const ProbeConfig& config, std::uint64_t seed);

}  // namespace refsel
