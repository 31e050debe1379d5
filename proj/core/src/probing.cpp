#include "refsel/probing.hpp"

#include <algorithm>

#include "refsel/errors.hpp"
#include "refsel/parallel.hpp"
#include "refsel/seeding.hpp"

namespace refsel {

namespace {

BaselineScores score_constant(const std::vector<int>& eval_labels, int constant, int num_classes) {
  std::vector<int> predicted(eval_labels.size(), constant);
  const EvalMetrics m = evaluate_predictions(
      eval_labels, predicted, std::vector<std::string>(num_classes, ""));
  return {m.accuracy, m.macro_f1};
}

}  // namespace

const std::vector<ProbeTask>& probe_tasks() {
  static const std::vector<ProbeTask> tasks = {
      {"DisStat",
       2,
       {"discourse_new", "discourse_old"},
       [](const FeatureVector& f) { return static_cast<int>(f.dis_stat); }},
      {"SenStat",
       2,
       {"sentence_new", "sentence_old"},
       [](const FeatureVector& f) { return static_cast<int>(f.sen_stat); }},
      {"Syn",
       2,
       {"subject", "object"},
       [](const FeatureVector& f) { return static_cast<int>(f.syn); }},
      {"DistAnt",
       4,
       {"same_sentence", "one_away", "more_than_one", "first_mention"},
       [](const FeatureVector& f) { return static_cast<int>(f.dist_ant); }},
      {"IntRef",
       3,
       {"first_mention", "previous_same", "previous_different"},
       [](const FeatureVector& f) { return static_cast<int>(f.int_ref); }},
      {"LocPro",
       2,
       {"not_prominent", "prominent"},
       [](const FeatureVector& f) { return static_cast<int>(f.loc_pro); }},
      {"GloPro",
       2,
       {"not_prominent", "prominent"},
       [](const FeatureVector& f) { return static_cast<int>(f.glo_pro); }},
      {"MetaPro",
       4,
       {"b0_50", "b50_150", "b150_290", "b290_inf"},
       [](const FeatureVector& f) { return static_cast<int>(f.meta_pro); }},
  };
  return tasks;
}

const ProbeTask& probe_task(const std::string& name) {
  for (const ProbeTask& t : probe_tasks())
    if (t.name == name) return t;
  throw ConfigError("unknown probing task: " + name);
}

std::vector<int> task_labels(const ProbeTask& task, const FeatureTable& table) {
  std::vector<int> labels;
  labels.reserve(table.rows.size());
  for (const FeatureVector& fv : table.rows) labels.push_back(task.label_of(fv));
  return labels;
}

BaselineScores random_baseline(const std::vector<int>& eval_labels, int num_classes,
                               std::uint64_t seed) {
  if (eval_labels.empty()) throw ValidationError("random_baseline: empty labels");
  Rng rng(seed);
  std::vector<int> predicted(eval_labels.size());
  for (int& p : predicted) p = static_cast<int>(rng.uniform_int(num_classes));
  const EvalMetrics m = evaluate_predictions(
      eval_labels, predicted, std::vector<std::string>(num_classes, ""));
  return {m.accuracy, m.macro_f1};
}

int majority_class(const std::vector<int>& labels, int num_classes) {
  if (labels.empty()) throw ValidationError("majority_class: empty labels");
  std::vector<std::size_t> counts(num_classes, 0);
  for (int y : labels) ++counts[y];
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

BaselineScores majority_baseline(const std::vector<int>& train_labels,
                                 const std::vector<int>& eval_labels, int num_classes) {
  if (eval_labels.empty()) throw ValidationError("majority_baseline: empty labels");
  return score_constant(eval_labels, majority_class(train_labels, num_classes), num_classes);
}

ProbeScores train_and_score_probe(const std::vector<std::vector<double>>& train_reps,
                                  const std::vector<int>& train_labels,
                                  const std::vector<std::vector<double>>& eval_reps,
                                  const std::vector<int>& eval_labels, int num_classes,
                                  const ProbeConfig& config, std::uint64_t seed) {
  // A task whose training labels collapse to one class cannot fit a
  // probe; it degenerates to the constant classifier.
  const int first = train_labels.empty() ? 0 : train_labels.front();
  if (std::all_of(train_labels.begin(), train_labels.end(),
                  [first](int y) { return y == first; })) {
    const BaselineScores constant = score_constant(eval_labels, first, num_classes);
    ProbeScores scores;
    scores.accuracy = constant.accuracy;
    scores.macro_f1 = constant.macro_f1;
    scores.per_seed_accuracy.assign(config.trainings, constant.accuracy);
    scores.per_seed_macro_f1.assign(config.trainings, constant.macro_f1);
    return scores;
  }
  ProbeScores scores;
  scores.per_seed_accuracy.resize(config.trainings);
  scores.per_seed_macro_f1.resize(config.trainings);
  parallel_for(config.trainings, config.jobs, [&](std::size_t t) {
    const LogisticModel probe = train_logistic(train_reps, train_labels, num_classes,
                                               config.logistic, derive_seed(seed, "probe", t));
    std::vector<int> predicted;
    predicted.reserve(eval_reps.size());
    for (const auto& row : eval_reps) predicted.push_back(probe.predict(row));
    const EvalMetrics m = evaluate_predictions(
        eval_labels, predicted, std::vector<std::string>(num_classes, ""));
    scores.per_seed_accuracy[t] = m.accuracy;
    scores.per_seed_macro_f1[t] = m.macro_f1;
  });
  for (int t = 0; t < config.trainings; ++t) {
    scores.accuracy += scores.per_seed_accuracy[t];
    scores.macro_f1 += scores.per_seed_macro_f1[t];
  }
  scores.accuracy /= config.trainings;
  scores.macro_f1 /= config.trainings;
  return scores;
}

ProbeReport run_probe_suite(const TrainedModel& model, const Corpus& corpus,
                            const ProbeConfig& config, std::uint64_t seed) {
  const QuantileBounds bounds = fit_distance_quantiles(corpus.train);
  const auto counts = corpus_entity_counts(corpus, config.counts_train_only);
  const FeatureTable train_features = extract_all(corpus.train, corpus.meta, counts, bounds);
  const CorpusSplit& eval_split = config.eval_on_train ? corpus.train : corpus.test;
  const FeatureTable eval_features = extract_all(eval_split, corpus.meta, counts, bounds);

  const std::vector<std::vector<double>> train_reps = embed_representations(model, corpus.train);
  const std::vector<std::vector<double>> eval_reps =
      config.eval_on_train ? train_reps : embed_representations(model, corpus.test);

  // Optional control: same architecture, freshly initialized, never trained.
  std::vector<std::vector<double>> untrained_train_reps, untrained_eval_reps;
  if (config.control_untrained) {
    TrainedModel untrained;
    untrained.config = model.config;
    untrained.scheme = model.scheme;
    untrained.vocab = model.vocab;
    untrained.params = RfsModel(model.config, derive_seed(seed, "probe.untrained")).params();
    untrained_train_reps = embed_representations(untrained, corpus.train);
    untrained_eval_reps = config.eval_on_train
                              ? untrained_train_reps
                              : embed_representations(untrained, corpus.test);
  }

  ProbeReport report;
  report.has_shuffled_control = config.control_shuffled;
  report.has_untrained_control = config.control_untrained;
  for (const ProbeTask& task : probe_tasks()) {
    TaskReport tr;
    tr.task = task.name;
    tr.num_classes = task.num_classes;
    const std::vector<int> train_labels = task_labels(task, train_features);
    const std::vector<int> eval_labels = task_labels(task, eval_features);

    tr.random = random_baseline(eval_labels, task.num_classes,
                                derive_seed(seed, "baseline.random." + task.name));
    tr.majority = majority_baseline(train_labels, eval_labels, task.num_classes);
    tr.probe = train_and_score_probe(train_reps, train_labels, eval_reps, eval_labels,
                                     task.num_classes, config,
                                     derive_seed(seed, "probe." + task.name));
    if (config.control_shuffled) {
      std::vector<int> shuffled = train_labels;
      Rng rng(derive_seed(seed, "probe.shuffle." + task.name));
      rng.shuffle(shuffled);
      tr.control_shuffled = train_and_score_probe(
          train_reps, shuffled, eval_reps, eval_labels, task.num_classes, config,
          derive_seed(seed, "probe.shuffled." + task.name));
    }
    if (config.control_untrained) {
      tr.control_untrained = train_and_score_probe(
          untrained_train_reps, train_labels, untrained_eval_reps, eval_labels, task.num_classes,
          config, derive_seed(seed, "probe.untrained." + task.name));
    }
    report.tasks.push_back(std::move(tr));
  }
  return report;
}

}  // namespace refsel
