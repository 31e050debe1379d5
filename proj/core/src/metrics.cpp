#include "refsel/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "refsel/errors.hpp"

namespace refsel {

std::vector<std::vector<std::size_t>> confusion_matrix(const std::vector<int>& gold,
                                                       const std::vector<int>& predicted,
                                                       int num_classes) {
  if (gold.size() != predicted.size())
    throw ValidationError("confusion_matrix: gold/predicted length mismatch");
  std::vector<std::vector<std::size_t>> m(num_classes, std::vector<std::size_t>(num_classes, 0));
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] < 0 || gold[i] >= num_classes || predicted[i] < 0 || predicted[i] >= num_classes)
      throw ValidationError("confusion_matrix: class index out of range");
    ++m[gold[i]][predicted[i]];
  }
  return m;
}

EvalMetrics metrics_from_confusion(const std::vector<std::vector<std::size_t>>& confusion,
                                   const std::vector<std::string>& class_names) {
  const int k = static_cast<int>(confusion.size());
  if (k == 0) throw ValidationError("metrics: empty confusion matrix");
  EvalMetrics out;
  out.confusion = confusion;
  std::size_t total = 0, correct = 0;
  for (int g = 0; g < k; ++g) {
    if (static_cast<int>(confusion[g].size()) != k)
      throw ValidationError("metrics: confusion matrix not square");
    for (int p = 0; p < k; ++p) total += confusion[g][p];
    correct += confusion[g][g];
  }
  if (total == 0) throw ValidationError("metrics: empty evaluation set");
  out.accuracy = static_cast<double>(correct) / total;
  for (int c = 0; c < k; ++c) {
    ClassMetrics cm;
    cm.label = c < static_cast<int>(class_names.size()) ? class_names[c] : std::to_string(c);
    std::size_t gold_count = 0, pred_count = 0;
    for (int p = 0; p < k; ++p) gold_count += confusion[c][p];
    for (int g = 0; g < k; ++g) pred_count += confusion[g][c];
    cm.support = gold_count;
    const double tp = static_cast<double>(confusion[c][c]);
    cm.precision = pred_count == 0 ? 0.0 : tp / pred_count;
    cm.recall = gold_count == 0 ? 0.0 : tp / gold_count;
    cm.f1 = (cm.precision + cm.recall) == 0.0
                ? 0.0
                : 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall);
    out.macro_precision += cm.precision;
    out.macro_recall += cm.recall;
    out.macro_f1 += cm.f1;
    out.per_class.push_back(std::move(cm));
  }
  out.macro_precision /= k;
  out.macro_recall /= k;
  out.macro_f1 /= k;
  return out;
}

EvalMetrics evaluate_predictions(const std::vector<int>& gold, const std::vector<int>& predicted,
                                 const std::vector<std::string>& class_names) {
  return metrics_from_confusion(
      confusion_matrix(gold, predicted, static_cast<int>(class_names.size())), class_names);
}

double multiclass_log_loss(const std::vector<int>& gold,
                           const std::vector<std::vector<double>>& probabilities) {
  if (gold.size() != probabilities.size() || gold.empty())
    throw ValidationError("log_loss: size mismatch or empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const double p = std::max(probabilities[i][gold[i]], 1e-300);
    sum += -std::log(p);
  }
  return sum / gold.size();
}

}  // namespace refsel
