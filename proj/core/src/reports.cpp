#include "refsel/reports.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace refsel {

using nlohmann::json;

namespace {

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string pct_cell(double accuracy, double macro_f1) {
  return fixed(100.0 * accuracy, 2) + "(" + fixed(100.0 * macro_f1, 2) + ")";
}

json metrics_to_json(const EvalMetrics& m) {
  json per_class = json::array();
  for (const ClassMetrics& c : m.per_class) {
    per_class.push_back({{"label", c.label},
                         {"support", c.support},
                         {"precision", c.precision},
                         {"recall", c.recall},
                         {"f1", c.f1}});
  }
  return {{"accuracy", m.accuracy},
          {"macro_precision", m.macro_precision},
          {"macro_recall", m.macro_recall},
          {"macro_f1", m.macro_f1},
          {"per_class", std::move(per_class)},
          {"confusion", m.confusion}};
}

}  // namespace

std::string corpus_stats_to_json(const CorpusStats& stats) {
  json forms = json::object();
  for (const auto& [form, count] : stats.form_counts) forms[to_string(form)] = count;
  json entities = json::object();
  for (const auto& [id, count] : stats.entity_mention_counts) entities[id] = count;
  json j = {{"documents", stats.documents},
            {"sentences_per_document", stats.sentences_per_document},
            {"mentions", stats.mentions},
            {"first_mentions", stats.first_mentions},
            {"first_mention_fraction", stats.first_mention_fraction},
            {"form_counts", std::move(forms)},
            {"entity_mention_counts", std::move(entities)}};
  return j.dump(2);
}

std::string render_corpus_stats_text(const CorpusStats& stats) {
  std::ostringstream out;
  out << "documents                " << stats.documents << "\n"
      << "sentences/document       " << fixed(stats.sentences_per_document, 4) << "\n"
      << "mentions                 " << stats.mentions << "\n"
      << "first mentions           " << stats.first_mentions << "\n"
      << "first-mention fraction   " << fixed(stats.first_mention_fraction, 4) << "\n"
      << "form counts:\n";
  for (const auto& [form, count] : stats.form_counts)
    out << "  " << std::left << std::setw(16) << to_string(form) << count << "\n";
  out << "entity mention counts:\n";
  for (const auto& [id, count] : stats.entity_mention_counts)
    out << "  " << std::left << std::setw(24) << id << count << "\n";
  return out.str();
}

std::string eval_report_to_json(const EvalReport& report, const LabelScheme& scheme) {
  json per_seed = json::array();
  for (std::size_t i = 0; i < report.per_seed.size(); ++i) {
    json entry = metrics_to_json(report.per_seed[i]);
    entry["seed"] = report.seeds[i];
    per_seed.push_back(std::move(entry));
  }
  json j = {{"scheme", to_string(scheme.arity())},
            {"runs", report.per_seed.size()},
            {"per_seed", std::move(per_seed)},
            {"mean",
             {{"accuracy", report.mean_accuracy},
              {"macro_precision", report.mean_macro_precision},
              {"macro_recall", report.mean_macro_recall},
              {"macro_f1", report.mean_macro_f1}}}};
  return j.dump(2);
}

std::string render_eval_report_text(const EvalReport& report, const LabelScheme& scheme) {
  std::ostringstream out;
  out << "scheme: " << to_string(scheme.arity()) << "   runs: " << report.per_seed.size() << "\n\n";
  out << std::left << std::setw(8) << "run" << std::setw(12) << "accuracy" << std::setw(12)
      << "macro-P" << std::setw(12) << "macro-R" << std::setw(12) << "macro-F1"
      << "\n";
  for (std::size_t i = 0; i < report.per_seed.size(); ++i) {
    const EvalMetrics& m = report.per_seed[i];
    out << std::left << std::setw(8) << i << std::setw(12) << fixed(m.accuracy, 4)
        << std::setw(12) << fixed(m.macro_precision, 4) << std::setw(12)
        << fixed(m.macro_recall, 4) << std::setw(12) << fixed(m.macro_f1, 4) << "\n";
  }
  out << std::left << std::setw(8) << "mean" << std::setw(12) << fixed(report.mean_accuracy, 4)
      << std::setw(12) << fixed(report.mean_macro_precision, 4) << std::setw(12)
      << fixed(report.mean_macro_recall, 4) << std::setw(12) << fixed(report.mean_macro_f1, 4)
      << "\n";
  if (!report.per_seed.empty()) {
    out << "\nper-class (run 0):\n";
    out << std::left << std::setw(18) << "class" << std::setw(10) << "support" << std::setw(12)
        << "precision" << std::setw(12) << "recall" << std::setw(12) << "f1"
        << "\n";
    for (const ClassMetrics& c : report.per_seed[0].per_class)
      out << std::left << std::setw(18) << c.label << std::setw(10) << c.support << std::setw(12)
          << fixed(c.precision, 4) << std::setw(12) << fixed(c.recall, 4) << std::setw(12)
          << fixed(c.f1, 4) << "\n";
  }
  return out.str();
}

std::string single_eval_to_json(const EvalMetrics& metrics, const LabelScheme& scheme) {
  json j = {{"scheme", to_string(scheme.arity())}, {"metrics", metrics_to_json(metrics)}};
  return j.dump(2);
}

std::string render_single_eval_text(const EvalMetrics& metrics, const LabelScheme& scheme) {
  std::ostringstream out;
  out << "scheme: " << to_string(scheme.arity()) << "\n"
      << "accuracy        " << fixed(metrics.accuracy, 4) << "\n"
      << "macro precision " << fixed(metrics.macro_precision, 4) << "\n"
      << "macro recall    " << fixed(metrics.macro_recall, 4) << "\n"
      << "macro F1        " << fixed(metrics.macro_f1, 4) << "\n\n";
  out << std::left << std::setw(18) << "class" << std::setw(10) << "support" << std::setw(12)
      << "precision" << std::setw(12) << "recall" << std::setw(12) << "f1"
      << "\n";
  for (const ClassMetrics& c : metrics.per_class)
    out << std::left << std::setw(18) << c.label << std::setw(10) << c.support << std::setw(12)
        << fixed(c.precision, 4) << std::setw(12) << fixed(c.recall, 4) << std::setw(12)
        << fixed(c.f1, 4) << "\n";
  return out.str();
}

std::string confusion_to_tsv(const std::vector<std::vector<std::size_t>>& confusion,
                             const std::vector<std::string>& class_names) {
  std::ostringstream out;
  out << "gold\\pred";
  for (const std::string& name : class_names) out << '\t' << name;
  out << '\n';
  for (std::size_t g = 0; g < confusion.size(); ++g) {
    out << class_names[g];
    for (std::size_t p = 0; p < confusion[g].size(); ++p) out << '\t' << confusion[g][p];
    out << '\n';
  }
  return out.str();
}

namespace {

json probe_scores_to_json(const ProbeScores& s) {
  return {{"accuracy", s.accuracy},
          {"macro_f1", s.macro_f1},
          {"per_seed_accuracy", s.per_seed_accuracy},
          {"per_seed_macro_f1", s.per_seed_macro_f1}};
}

}  // namespace

std::string probe_report_to_json(const ProbeReport& report) {
  json tasks = json::array();
  for (const TaskReport& t : report.tasks) {
    json jt = {{"task", t.task},
               {"classes", t.num_classes},
               {"random", {{"accuracy", t.random.accuracy}, {"macro_f1", t.random.macro_f1}}},
               {"majority",
                {{"accuracy", t.majority.accuracy}, {"macro_f1", t.majority.macro_f1}}},
               {"probe", probe_scores_to_json(t.probe)}};
    if (report.has_shuffled_control)
      jt["control_shuffled"] = probe_scores_to_json(t.control_shuffled);
    if (report.has_untrained_control)
      jt["control_untrained"] = probe_scores_to_json(t.control_untrained);
    tasks.push_back(std::move(jt));
  }
  json j = {{"tasks", std::move(tasks)}};
  return j.dump(2);
}

std::string render_probe_grid_text(const ProbeReport& report) {
  std::ostringstream out;
  const int w = 16;
  out << std::left << std::setw(w) << "system";
  for (const TaskReport& t : report.tasks) out << std::setw(w) << t.task;
  out << "\n";
  auto row = [&](const std::string& name, auto&& cell) {
    out << std::left << std::setw(w) << name;
    for (const TaskReport& t : report.tasks) out << std::setw(w) << cell(t);
    out << "\n";
  };
  row("random", [](const TaskReport& t) { return pct_cell(t.random.accuracy, t.random.macro_f1); });
  row("majority",
      [](const TaskReport& t) { return pct_cell(t.majority.accuracy, t.majority.macro_f1); });
  row("probe", [](const TaskReport& t) { return pct_cell(t.probe.accuracy, t.probe.macro_f1); });
  if (report.has_shuffled_control)
    row("shuffled", [](const TaskReport& t) {
      return pct_cell(t.control_shuffled.accuracy, t.control_shuffled.macro_f1);
    });
  if (report.has_untrained_control)
    row("untrained", [](const TaskReport& t) {
      return pct_cell(t.control_untrained.accuracy, t.control_untrained.macro_f1);
    });
  return out.str();
}

std::string importance_to_json(const PermutationImportance& importance, const CvMetrics& cv) {
  json features = json::array();
  for (std::size_t i = 0; i < importance.features.size(); ++i) {
    features.push_back({{"feature", importance.features[i]},
                        {"mean_loss_increase", importance.mean_loss_increase[i]},
                        {"std_loss_increase", importance.std_loss_increase[i]}});
  }
  json per_fold = json::array();
  for (const FoldMetrics& f : cv.per_fold)
    per_fold.push_back(
        {{"accuracy", f.accuracy}, {"macro_f1", f.macro_f1}, {"log_loss", f.log_loss}});
  json j = {{"baseline_loss", importance.baseline_loss},
            {"repetitions", importance.repetitions},
            {"features", std::move(features)},
            {"cross_validation",
             {{"per_fold", std::move(per_fold)},
              {"mean",
               {{"accuracy", cv.mean.accuracy},
                {"macro_f1", cv.mean.macro_f1},
                {"log_loss", cv.mean.log_loss}}}}}};
  return j.dump(2);
}

std::string render_importance_text(const PermutationImportance& importance) {
  std::vector<std::size_t> order(importance.features.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return importance.mean_loss_increase[a] > importance.mean_loss_increase[b];
  });
  std::ostringstream out;
  out << "baseline log-loss " << fixed(importance.baseline_loss, 6) << ", repetitions "
      << importance.repetitions << "\n";
  out << std::left << std::setw(16) << "feature" << std::setw(20) << "mean loss increase"
      << std::setw(14) << "std"
      << "\n";
  for (std::size_t i : order)
    out << std::left << std::setw(16) << importance.features[i] << std::setw(20)
        << fixed(importance.mean_loss_increase[i], 6) << std::setw(14)
        << fixed(importance.std_loss_increase[i], 6) << "\n";
  return out.str();
}

std::string importance_to_tsv(const PermutationImportance& importance) {
  std::ostringstream out;
  out << "feature\tmean_loss_increase\tstd_loss_increase\n";
  for (std::size_t i = 0; i < importance.features.size(); ++i)
    out << importance.features[i] << '\t' << importance.mean_loss_increase[i] << '\t'
        << importance.std_loss_increase[i] << '\n';
  return out.str();
}

std::string shapley_to_json(const ShapleyResult& shapley) {
  json features = json::array();
  for (std::size_t i = 0; i < shapley.features.size(); ++i) {
    features.push_back({{"feature", shapley.features[i]},
                        {"mean_contribution", shapley.mean_contribution[i]},
                        {"per_ordering", shapley.per_ordering[i]}});
  }
  json j = {{"explained_class", shapley.explained_class},
            {"orderings", shapley.orderings},
            {"instance_value", shapley.instance_value},
            {"mean_background_value", shapley.mean_background_value},
            {"features", std::move(features)}};
  return j.dump(2);
}

std::string render_shapley_text(const ShapleyResult& shapley) {
  std::ostringstream out;
  out << "explained class " << shapley.explained_class << ", orderings " << shapley.orderings
      << "\n"
      << "f(instance) " << fixed(shapley.instance_value, 6) << ", mean f(background) "
      << fixed(shapley.mean_background_value, 6) << "\n";
  out << std::left << std::setw(16) << "feature" << std::setw(16) << "contribution"
      << "\n";
  for (std::size_t i = 0; i < shapley.features.size(); ++i)
    out << std::left << std::setw(16) << shapley.features[i] << std::setw(16)
        << fixed(shapley.mean_contribution[i], 6) << "\n";
  return out.str();
}

std::string shapley_to_tsv(const ShapleyResult& shapley) {
  std::ostringstream out;
  out << "feature\tordering\tcontribution\n";
  for (std::size_t i = 0; i < shapley.features.size(); ++i)
    for (std::size_t t = 0; t < shapley.per_ordering[i].size(); ++t)
      out << shapley.features[i] << '\t' << t << '\t' << shapley.per_ordering[i][t] << '\n';
  return out.str();
}

std::string train_log_to_json(const TrainLog& log) {
  json epochs = json::array();
  for (const EpochRecord& e : log.epochs)
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"dev_macro_f1", e.dev_macro_f1},
                      {"improved", e.improved}});
  json j = {{"epochs", std::move(epochs)},
            {"best_epoch", log.best_epoch},
            {"best_dev_macro_f1", log.best_dev_macro_f1},
            {"diverged", log.diverged}};
  if (log.embedding_coverage >= 0.0) j["embedding_coverage"] = log.embedding_coverage;
  return j.dump(2);
}

}  // namespace refsel
