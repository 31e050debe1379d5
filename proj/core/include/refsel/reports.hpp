#pragma once

#include <string>
#include <vector>

#include "refsel/corpus.hpp"
#include "refsel/gbdt.hpp"
#include "refsel/importance.hpp"
#include "refsel/probing.hpp"
#include "refsel/training.hpp"

namespace refsel {

// Machine-readable report bodies are canonical JSON (sorted keys, no
// timestamps), so identical inputs serialize to identical bytes.

std::string corpus_stats_to_json(const CorpusStats& stats);
std::string render_corpus_stats_text(const CorpusStats& stats);

std::string eval_report_to_json(const EvalReport& report, const LabelScheme& scheme);
std::string render_eval_report_text(const EvalReport& report, const LabelScheme& scheme);
std::string single_eval_to_json(const EvalMetrics& metrics, const LabelScheme& scheme);
std::string render_single_eval_text(const EvalMetrics& metrics, const LabelScheme& scheme);
std::string confusion_to_tsv(const std::vector<std::vector<std::size_t>>& confusion,
                             const std::vector<std::string>& class_names);

std::string probe_report_to_json(const ProbeReport& report);
// Grid: rows = systems, columns = tasks, cells = "accuracy(macroF1)" in
// percent with two decimals.
std::string render_probe_grid_text(const ProbeReport& report);

std::string importance_to_json(const PermutationImportance& importance, const CvMetrics& cv);
std::string render_importance_text(const PermutationImportance& importance);
std::string importance_to_tsv(const PermutationImportance& importance);

std::string shapley_to_json(const ShapleyResult& shapley);
std::string render_shapley_text(const ShapleyResult& shapley);
std::string shapley_to_tsv(const ShapleyResult& shapley);

std::string train_log_to_json(const TrainLog& log);

// --- SVG charts ------------------------------------------------------------

std::string svg_confusion_heatmap(const std::vector<std::vector<std::size_t>>& confusion,
                                  const std::vector<std::string>& class_names,
                                  const std::string& title);
std::string svg_bar_chart(const std::vector<std::string>& names,
                          const std::vector<double>& values, const std::string& title);
std::string svg_box_plot(const std::vector<std::string>& names,
                         const std::vector<std::vector<double>>& samples,
                         const std::string& title);

}  // namespace refsel
