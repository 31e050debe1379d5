#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace refsel {

// Exact-count classification metrics. Confusion rows are gold classes,
// columns predictions. A class with no predictions gets precision 0 (and a
// class with no gold instances recall 0) rather than being dropped, so
// macro averages stay totals over all K classes.
struct ClassMetrics {
  std::string label;
  std::size_t support = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvalMetrics {
  std::vector<std::vector<std::size_t>> confusion;  // [gold][pred]
  std::vector<ClassMetrics> per_class;
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

std::vector<std::vector<std::size_t>> confusion_matrix(const std::vector<int>& gold,
                                                       const std::vector<int>& predicted,
                                                       int num_classes);

EvalMetrics metrics_from_confusion(const std::vector<std::vector<std::size_t>>& confusion,
                                   const std::vector<std::string>& class_names);

EvalMetrics evaluate_predictions(const std::vector<int>& gold, const std::vector<int>& predicted,
                                 const std::vector<std::string>& class_names);

// -mean log p[gold] over rows of class probabilities.
double multiclass_log_loss(const std::vector<int>& gold,
                           const std::vector<std::vector<double>>& probabilities);

}  // namespace refsel
