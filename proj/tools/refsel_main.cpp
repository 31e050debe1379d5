#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "refsel/corpus.hpp"
#include "refsel/errors.hpp"
#include "refsel/features.hpp"
#include "refsel/gbdt.hpp"
#include "refsel/gradcheck.hpp"
#include "refsel/importance.hpp"
#include "refsel/models.hpp"
#include "refsel/probing.hpp"
#include "refsel/reports.hpp"
#include "refsel/seeding.hpp"
#include "refsel/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace refsel;

namespace {

constexpr const char* kToolVersion = "0.1.0";

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
}

// Every command leaves a manifest (JSON) plus its resolved key=value
// config (resolved.cfg, one [command] section); re-running the same
// command with `--config <dir>/resolved.cfg --out <newdir>` reproduces
// the machine-readable artifacts byte for byte. The output directory is
// not part of the recorded config, so runs into different directories
// compare equal.
void write_manifest(const fs::path& out_dir, const std::string& command, CLI::App* cmd,
                    std::uint64_t master_seed) {
  fs::create_directories(out_dir);
  std::string section = command;
  for (char& c : section)
    if (c == ' ') c = '.';
  std::string config_text;
  json config = json::object();
  std::istringstream lines(cmd->config_to_str(true, false));
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos || line.empty()) continue;
    const std::string key = line.substr(0, eq);
    if (key == "out") continue;
    config_text += line + "\n";
    config[key] = line.substr(eq + 1);
  }
  std::ostringstream hash;
  hash << std::hex << fnv1a64(command + "\n" + config_text);
  const json manifest = {{"format", "refsel-manifest"}, {"version", 1},
                         {"command", command},          {"tool_version", kToolVersion},
                         {"master_seed", master_seed},  {"config_hash", hash.str()},
                         {"config", config}};
  write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
  write_text(out_dir / "resolved.cfg", "[" + section + "]\n" + config_text);
}

Corpus load_from_flags(const std::string& train, const std::string& dev, const std::string& test,
                       const std::string& meta) {
  return load_corpus(train, dev, test, meta);
}

struct GbdtFlags {
  std::string train, dev, test, meta;
  std::string scheme = "4-way";
  std::string features = "probing";
  std::string counts = "all";
  std::string export_features;
  GbdtConfig config;
  int jobs = 1;
  std::uint64_t seed = 1;
  std::string out;
};

void add_gbdt_flags(CLI::App* cmd, GbdtFlags& flags) {
  cmd->add_option("--train", flags.train, "training split (JSONL)")->required();
  cmd->add_option("--dev", flags.dev, "dev split (JSONL)")->required();
  cmd->add_option("--test", flags.test, "test split (JSONL)")->required();
  cmd->add_option("--meta", flags.meta, "entity metadata sidecar (JSON)");
  cmd->add_option("--scheme", flags.scheme, "label scheme: 4-way, 3-way or 2-way");
  cmd->add_option("--features", flags.features, "feature set: probing or baseline");
  cmd->add_option("--counts", flags.counts,
                  "meta_pro counting population: all splits or train only");
  cmd->add_option("--export-features", flags.export_features,
                  "also write <prefix>_train.tsv/<prefix>_test.tsv feature tables");
  cmd->add_option("--rounds", flags.config.rounds, "boosting rounds");
  cmd->add_option("--learning-rate", flags.config.learning_rate, "shrinkage per round");
  cmd->add_option("--min-split-loss", flags.config.min_split_loss, "minimum split gain");
  cmd->add_option("--max-depth", flags.config.max_depth, "maximum tree depth");
  cmd->add_option("--subsample", flags.config.subsample, "row subsample ratio per tree");
  cmd->add_option("--folds", flags.config.folds, "cross-validation folds");
  cmd->add_option("--jobs", flags.jobs, "parallel workers");
  cmd->add_option("--seed", flags.seed, "master seed")->envname("REFSEL_SEED");
  cmd->add_option("--out", flags.out, "output directory")->required();
}

struct GbdtData {
  EncodedFeatures train_features, test_features;
  std::vector<int> train_labels, test_labels;
  int num_classes = 0;
};

GbdtData prepare_gbdt_data(const GbdtFlags& flags) {
  const Corpus corpus = load_from_flags(flags.train, flags.dev, flags.test, flags.meta);
  const LabelScheme scheme(scheme_from_string(flags.scheme));
  const QuantileBounds bounds = fit_distance_quantiles(corpus.train);
  if (flags.counts != "all" && flags.counts != "train")
    throw ConfigError("--counts must be 'all' or 'train'");
  const auto counts = corpus_entity_counts(corpus, flags.counts == "train");
  const FeatureTable train_table = extract_all(corpus.train, corpus.meta, counts, bounds);
  const FeatureTable test_table = extract_all(corpus.test, corpus.meta, counts, bounds);
  if (!flags.export_features.empty()) {
    fs::create_directories(fs::path(flags.export_features).parent_path());
    write_feature_table(train_table, flags.export_features + "_train.tsv");
    write_feature_table(test_table, flags.export_features + "_test.tsv");
  }
  const std::vector<std::string> names = flags.features == "baseline"
                                             ? baseline_feature_set(scheme.arity())
                                             : probing_feature_set();
  if (flags.features != "baseline" && flags.features != "probing")
    throw ConfigError("unknown feature set: " + flags.features);
  GbdtData data;
  data.train_features = encode_features(train_table, names);
  data.test_features = encode_features(test_table, names);
  data.train_labels = gold_classes(corpus.train, scheme);
  data.test_labels = gold_classes(corpus.test, scheme);
  data.num_classes = scheme.num_classes();
  return data;
}

int run_corpus_validate(const std::string& path, const std::string& meta) {
  const CorpusSplit split = parse_corpus(path, SplitName::train);
  if (!meta.empty()) parse_entity_meta(meta);
  std::cout << "ok: " << split.documents.size() << " documents\n";
  return 0;
}

CorpusStats stats_over_files(const std::vector<std::string>& paths) {
  CorpusSplit merged;
  merged.name = SplitName::train;
  for (const std::string& p : paths) {
    CorpusSplit s = parse_corpus(p, SplitName::train);
    for (Document& d : s.documents) merged.documents.push_back(std::move(d));
  }
  return corpus_stats(merged);
}

int run_report(const std::string& dir);

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"referential-form-selection workbench"};
  app.option_defaults()->always_capture_default(true);
  app.set_config("--config", "",
                 "resolved key=value config from a previous run; flags override");
  app.require_subcommand(1);

  int exit_code = 0;
  std::function<int()> action;
  // --config may appear after the subcommand; unmatched options fall
  // through to the top-level app
  auto falls = [](CLI::App* cmd) {
    cmd->fallthrough(true);
    return cmd;
  };

  // ---- corpus ----
  CLI::App* corpus_cmd = falls(app.add_subcommand("corpus", "corpus utilities"));
  corpus_cmd->require_subcommand(1);

  CLI::App* validate_cmd = falls(corpus_cmd->add_subcommand("validate", "check a corpus file"));
  {
    auto path = std::make_shared<std::string>();
    auto meta = std::make_shared<std::string>();
    validate_cmd->add_option("--path", *path, "corpus file (JSONL)")->required();
    validate_cmd->add_option("--meta", *meta, "entity metadata sidecar (JSON)");
    validate_cmd->callback(
        [&action, path, meta] { action = [path, meta] { return run_corpus_validate(*path, *meta); }; });
  }

  CLI::App* stats_cmd = falls(corpus_cmd->add_subcommand("stats", "print corpus statistics"));
  {
    auto paths = std::make_shared<std::vector<std::string>>();
    auto out = std::make_shared<std::string>();
    auto seed = std::make_shared<std::uint64_t>(1);
    stats_cmd->add_option("--path", *paths, "corpus file(s) (JSONL)")->required();
    stats_cmd->add_option("--out", *out, "output directory for stats.json");
    stats_cmd->add_option("--seed", *seed, "master seed")->envname("REFSEL_SEED");
    stats_cmd->callback([&action, paths, out, seed, stats_cmd] {
      action = [paths, out, seed, stats_cmd] {
        const CorpusStats stats = stats_over_files(*paths);
        std::cout << render_corpus_stats_text(stats);
        if (!out->empty()) {
          write_text(fs::path(*out) / "stats.json", corpus_stats_to_json(stats) + "\n");
          write_manifest(*out, "corpus stats", stats_cmd, *seed);
        }
        return 0;
      };
    });
  }

  CLI::App* synth_cmd = falls(corpus_cmd->add_subcommand("synth", "generate a synthetic corpus"));
  {
    struct SynthFlags {
      SynthConfig config;
      std::uint64_t seed = 1;
      std::string out;
    };
    auto flags = std::make_shared<SynthFlags>();
    synth_cmd->add_option("--docs", flags->config.documents, "number of documents");
    synth_cmd->add_option("--entities", flags->config.entity_inventory, "entity inventory size");
    synth_cmd->add_option("--noise", flags->config.noise_rate, "label noise rate in [0,1]");
    synth_cmd->add_option("--sentences-min", flags->config.sentences_per_document_min,
                          "min sentences per document");
    synth_cmd->add_option("--sentences-max", flags->config.sentences_per_document_max,
                          "max sentences per document");
    synth_cmd->add_option("--entities-per-doc-min", flags->config.entities_per_document_min,
                          "min active entities per document");
    synth_cmd->add_option("--entities-per-doc-max", flags->config.entities_per_document_max,
                          "max active entities per document");
    synth_cmd->add_option("--train-fraction", flags->config.train_fraction, "train share");
    synth_cmd->add_option("--dev-fraction", flags->config.dev_fraction, "dev share");
    synth_cmd->add_option("--seed", flags->seed, "master seed")->envname("REFSEL_SEED");
    synth_cmd->add_option("--out", flags->out, "output directory")->required();
    synth_cmd->callback([&action, flags, synth_cmd] {
      action = [flags, synth_cmd] {
        const SynthOutput synth = synthesize_corpus(flags->config, flags->seed);
        fs::create_directories(flags->out);
        const fs::path dir(flags->out);
        write_corpus(synth.corpus.train, (dir / "train.jsonl").string());
        write_corpus(synth.corpus.dev, (dir / "dev.jsonl").string());
        write_corpus(synth.corpus.test, (dir / "test.jsonl").string());
        write_entity_meta(synth.corpus.meta, (dir / "entities.json").string());
        write_manifest(dir, "corpus synth", synth_cmd, flags->seed);
        std::cout << "wrote train.jsonl dev.jsonl test.jsonl entities.json to " << flags->out
                  << "\n";
        return 0;
      };
    });
  }

  // ---- train ----
  CLI::App* train_cmd = falls(app.add_subcommand("train", "train models with the seeded protocol"));
  {
    struct TrainFlags {
      std::string train, dev, test, meta;
      std::string arch = "crnn";
      std::string scheme = "4-way";
      std::string optimizer = "adam";
      TrainConfig config;
      int runs = 5;
      int jobs = 1;
      std::uint64_t seed = 1;
      std::string out;
    };
    auto f = std::make_shared<TrainFlags>();
    train_cmd->add_option("--train", f->train, "training split (JSONL)")->required();
    train_cmd->add_option("--dev", f->dev, "dev split (JSONL)")->required();
    train_cmd->add_option("--test", f->test, "test split (JSONL)")->required();
    train_cmd->add_option("--meta", f->meta, "entity metadata sidecar (JSON)");
    train_cmd->add_option("--arch", f->arch, "architecture: conatt or crnn");
    train_cmd->add_option("--scheme", f->scheme, "label scheme: 4-way, 3-way or 2-way");
    train_cmd->add_option("--epochs", f->config.epochs, "maximum epochs");
    train_cmd->add_option("--batch", f->config.batch_size, "batch size");
    train_cmd->add_option("--lr", f->config.learning_rate, "learning rate");
    train_cmd->add_option("--optimizer", f->optimizer, "optimizer: adam or sgd");
    train_cmd->add_option("--patience", f->config.patience, "early-stop patience (dev macro-F1)");
    train_cmd->add_option("--embedding-dim", f->config.embedding_dim, "embedding width");
    train_cmd->add_option("--hidden", f->config.hidden_size, "recurrent state width");
    train_cmd->add_option("--attention-dim", f->config.attention_dim, "attention width");
    train_cmd->add_option("--rep-dim", f->config.rep_dim, "representation width");
    train_cmd->add_option("--max-context", f->config.max_context, "context window per side");
    train_cmd->add_flag("--bias", f->config.use_bias, "add bias terms to the dense heads");
    train_cmd->add_option("--embeddings", f->config.embeddings_file,
                          "pretrained token vectors (text format)");
    train_cmd->add_option("--runs", f->runs, "seeded runs to aggregate");
    train_cmd->add_option("--jobs", f->jobs, "parallel runs");
    train_cmd->add_option("--seed", f->seed, "master seed")->envname("REFSEL_SEED");
    train_cmd->add_option("--out", f->out, "output directory")->required();
    train_cmd->callback([&action, f, train_cmd] {
      action = [f, train_cmd] {
        f->config.arch = architecture_from_string(f->arch);
        f->config.scheme = scheme_from_string(f->scheme);
        f->config.optimizer = nn::optimizer_from_string(f->optimizer);
        const Corpus corpus = load_from_flags(f->train, f->dev, f->test, f->meta);
        const ProtocolResult result =
            run_protocol(f->config, corpus, f->seed, f->runs, f->jobs);
        const LabelScheme scheme(f->config.scheme);

        const fs::path dir(f->out);
        fs::create_directories(dir);
        write_text(dir / "eval_report.json", eval_report_to_json(result.report, scheme) + "\n");
        write_text(dir / "eval_report.txt", render_eval_report_text(result.report, scheme));
        json logs = json::array();
        for (const TrainResult& run : result.runs)
          logs.push_back(json::parse(train_log_to_json(run.log)));
        write_text(dir / "train_log.json", logs.dump(2) + "\n");
        save_checkpoint(result.runs[result.best_run].model,
                        (dir / "checkpoint_best.json").string());
        std::vector<std::string> names;
        for (int c = 0; c < scheme.num_classes(); ++c) names.push_back(scheme.class_name(c));
        write_text(dir / "confusion_run0.tsv",
                   confusion_to_tsv(result.report.per_seed[0].confusion, names));
        write_manifest(dir, "train", train_cmd, f->seed);
        std::cout << render_eval_report_text(result.report, scheme);
        std::cout << "best run: " << result.best_run
                  << " (dev macro-F1 " << result.runs[result.best_run].log.best_dev_macro_f1
                  << ")\ncheckpoint: " << (dir / "checkpoint_best.json").string() << "\n";
        return 0;
      };
    });
  }

  // ---- evaluate ----
  CLI::App* eval_cmd = falls(app.add_subcommand("evaluate", "evaluate a checkpoint on a split"));
  {
    struct EvalFlags {
      std::string checkpoint, data, scheme, out;
      std::uint64_t seed = 1;
    };
    auto f = std::make_shared<EvalFlags>();
    eval_cmd->add_option("--checkpoint", f->checkpoint, "model checkpoint (JSON)")->required();
    eval_cmd->add_option("--data", f->data, "labelled split (JSONL)")->required();
    eval_cmd->add_option("--scheme", f->scheme, "expected label scheme (checked)");
    eval_cmd->add_option("--seed", f->seed, "master seed")->envname("REFSEL_SEED");
    eval_cmd->add_option("--out", f->out, "output directory")->required();
    eval_cmd->callback([&action, f, eval_cmd] {
      action = [f, eval_cmd] {
        const TrainedModel model = load_checkpoint(f->checkpoint);
        if (!f->scheme.empty() && scheme_from_string(f->scheme) != model.scheme)
          throw ConfigError("scheme mismatch: checkpoint is " + to_string(model.scheme) +
                            ", requested " + f->scheme);
        const CorpusSplit split = parse_corpus(f->data, SplitName::test);
        const EvalMetrics metrics = evaluate(model, split);
        const LabelScheme scheme(model.scheme);
        std::vector<std::string> names;
        for (int c = 0; c < scheme.num_classes(); ++c) names.push_back(scheme.class_name(c));
        const fs::path dir(f->out);
        fs::create_directories(dir);
        write_text(dir / "evaluation.json", single_eval_to_json(metrics, scheme) + "\n");
        write_text(dir / "evaluation.txt", render_single_eval_text(metrics, scheme));
        write_text(dir / "confusion.tsv", confusion_to_tsv(metrics.confusion, names));
        write_text(dir / "confusion.svg",
                   svg_confusion_heatmap(metrics.confusion, names, "confusion matrix"));
        write_manifest(dir, "evaluate", eval_cmd, f->seed);
        std::cout << render_single_eval_text(metrics, scheme);
        return 0;
      };
    });
  }

  // ---- probe ----
  CLI::App* probe_cmd = falls(app.add_subcommand("probe", "run the probing suite on a checkpoint"));
  {
    struct ProbeFlags {
      std::string checkpoint, train, dev, test, meta, out;
      ProbeConfig config;
      std::uint64_t seed = 1;
    };
    auto f = std::make_shared<ProbeFlags>();
    probe_cmd->add_option("--checkpoint", f->checkpoint, "model checkpoint (JSON)")->required();
    probe_cmd->add_option("--train", f->train, "training split (JSONL)")->required();
    probe_cmd->add_option("--dev", f->dev, "dev split (JSONL)")->required();
    probe_cmd->add_option("--test", f->test, "test split (JSONL)")->required();
    probe_cmd->add_option("--meta", f->meta, "entity metadata sidecar (JSON)");
    probe_cmd->add_option("--trainings", f->config.trainings, "probes per task, averaged");
    probe_cmd->add_option("--l2", f->config.logistic.l2, "probe L2 strength");
    probe_cmd->add_option("--max-iters", f->config.logistic.max_iterations,
                          "probe optimizer iterations");
    probe_cmd->add_flag("--standardize", f->config.logistic.standardize,
                        "z-score representations before probing");
    probe_cmd->add_flag("--eval-on-train", f->config.eval_on_train,
                        "score probes on the training split instead of test");
    probe_cmd->add_flag("--counts-train-only", f->config.counts_train_only,
                        "count meta_pro over the training split only");
    probe_cmd->add_flag("--shuffled-control", f->config.control_shuffled,
                        "add a shuffled-label control probe");
    probe_cmd->add_flag("--untrained-control", f->config.control_untrained,
                        "add an untrained-model control probe");
    probe_cmd->add_option("--jobs", f->config.jobs, "parallel probe trainings");
    probe_cmd->add_option("--seed", f->seed, "master seed")->envname("REFSEL_SEED");
    probe_cmd->add_option("--out", f->out, "output directory")->required();
    probe_cmd->callback([&action, f, probe_cmd] {
      action = [f, probe_cmd] {
        const TrainedModel model = load_checkpoint(f->checkpoint);
        const Corpus corpus = load_from_flags(f->train, f->dev, f->test, f->meta);
        const ProbeReport report = run_probe_suite(model, corpus, f->config, f->seed);
        const fs::path dir(f->out);
        fs::create_directories(dir);
        write_text(dir / "probe_report.json", probe_report_to_json(report) + "\n");
        write_text(dir / "probe_grid.txt", render_probe_grid_text(report));
        write_manifest(dir, "probe", probe_cmd, f->seed);
        std::cout << render_probe_grid_text(report);
        return 0;
      };
    });
  }

  // ---- importance ----
  CLI::App* imp_cmd = falls(app.add_subcommand("importance", "tree-baseline variable importance"));
  imp_cmd->require_subcommand(1);

  CLI::App* permute_cmd = falls(imp_cmd->add_subcommand("permute", "permutation importance"));
  {
    auto f = std::make_shared<GbdtFlags>();
    auto reps = std::make_shared<int>(10);
    add_gbdt_flags(permute_cmd, *f);
    permute_cmd->add_option("--reps", *reps, "shuffles per feature");
    permute_cmd->callback([&action, f, reps, permute_cmd] {
      action = [f, reps, permute_cmd] {
        const GbdtData data = prepare_gbdt_data(*f);
        const GbdtTrainResult trained = train_gbdt(data.train_features, data.train_labels,
                                                   data.num_classes, f->config,
                                                   derive_seed(f->seed, "importance.gbdt"), true);
        const PermutationImportance importance =
            permutation_importance(trained.model, data.test_features, data.test_labels, *reps,
                                   derive_seed(f->seed, "importance.permute"), f->jobs);
        const fs::path dir(f->out);
        fs::create_directories(dir);
        write_text(dir / "importance.json", importance_to_json(importance, trained.cv) + "\n");
        write_text(dir / "importance.tsv", importance_to_tsv(importance));
        write_text(dir / "importance.txt", render_importance_text(importance));
        write_text(dir / "importance.svg",
                   svg_bar_chart(importance.features, importance.mean_loss_increase,
                                 "permutation importance (held-out log-loss increase)"));
        write_manifest(dir, "importance permute", permute_cmd, f->seed);
        std::cout << render_importance_text(importance);
        std::cout << "cv mean accuracy " << trained.cv.mean.accuracy << ", macro-F1 "
                  << trained.cv.mean.macro_f1 << "\n";
        return 0;
      };
    });
  }

  CLI::App* shapley_cmd = falls(imp_cmd->add_subcommand("shapley", "sampled Shapley contributions"));
  {
    auto f = std::make_shared<GbdtFlags>();
    auto orderings = std::make_shared<int>(100);
    auto instance = std::make_shared<int>(0);
    auto explained = std::make_shared<int>(-1);
    auto background = std::make_shared<int>(50);
    add_gbdt_flags(shapley_cmd, *f);
    shapley_cmd->add_option("--orderings", *orderings, "random feature orderings");
    shapley_cmd->add_option("--instance", *instance, "test-split row to explain");
    shapley_cmd->add_option("--explained-class", *explained,
                            "class whose probability is explained (-1: predicted)");
    shapley_cmd->add_option("--background", *background, "background rows sampled from train");
    shapley_cmd->callback([&action, f, orderings, instance, explained, background, shapley_cmd] {
      action = [f, orderings, instance, explained, background, shapley_cmd] {
        const GbdtData data = prepare_gbdt_data(*f);
        const GbdtTrainResult trained = train_gbdt(data.train_features, data.train_labels,
                                                   data.num_classes, f->config,
                                                   derive_seed(f->seed, "importance.gbdt"), false);
        if (*instance < 0 || *instance >= static_cast<int>(data.test_features.rows.size()))
          throw ConfigError("instance index out of range");
        EncodedFeatures bg = data.train_features;
        if (*background > 0 && *background < static_cast<int>(bg.rows.size())) {
          Rng rng(derive_seed(f->seed, "importance.background"));
          std::vector<int> pick = rng.permutation(static_cast<int>(bg.rows.size()));
          std::vector<std::vector<double>> rows;
          for (int i = 0; i < *background; ++i) rows.push_back(bg.rows[pick[i]]);
          bg.rows = std::move(rows);
        }
        const ShapleyResult shapley =
            shapley_sample(trained.model, bg, data.test_features.rows[*instance], *explained,
                           *orderings, derive_seed(f->seed, "importance.shapley"));
        const fs::path dir(f->out);
        fs::create_directories(dir);
        write_text(dir / "shapley.json", shapley_to_json(shapley) + "\n");
        write_text(dir / "shapley.tsv", shapley_to_tsv(shapley));
        write_text(dir / "shapley.txt", render_shapley_text(shapley));
        write_text(dir / "shapley_box.svg",
                   svg_box_plot(shapley.features, shapley.per_ordering,
                                "Shapley contributions over orderings"));
        write_manifest(dir, "importance shapley", shapley_cmd, f->seed);
        std::cout << render_shapley_text(shapley);
        return 0;
      };
    });
  }

  // ---- gradcheck ----
  CLI::App* grad_cmd = falls(app.add_subcommand("gradcheck", "finite-difference gradient checks"));
  {
    auto tolerance = std::make_shared<double>(1e-4);
    grad_cmd->add_option("--tolerance", *tolerance, "max relative error allowed");
    grad_cmd->callback([&action, tolerance] {
      action = [tolerance] {
        const std::vector<GradCheckCase> cases = run_gradcheck_suite(*tolerance);
        bool all_pass = true;
        double worst = 0.0;
        for (const GradCheckCase& c : cases) {
          std::printf("%-16s max relative error %.3e  %s\n", c.name.c_str(),
                      c.report.max_rel_error, c.report.pass ? "ok" : "FAIL");
          all_pass = all_pass && c.report.pass;
          worst = std::max(worst, c.report.max_rel_error);
        }
        std::printf("overall max relative error %.3e (tolerance %.1e)\n", worst, *tolerance);
        if (!all_pass) throw NumericalError("gradient check tolerance exceeded");
        return 0;
      };
    });
  }

  // ---- report ----
  CLI::App* report_cmd = falls(app.add_subcommand("report", "re-render reports from an output directory"));
  {
    auto dir = std::make_shared<std::string>();
    report_cmd->add_option("--dir", *dir, "artifact directory")->required();
    report_cmd->callback([&action, dir] { action = [dir] { return run_report(*dir); }; });
  }

  try {
    app.parse(argc, argv);
    if (action) exit_code = action();
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the usage message
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}

namespace {

int run_report(const std::string& dir_str) {
  const fs::path dir(dir_str);
  if (!fs::exists(dir)) throw ConfigError("no such directory: " + dir_str);
  bool rendered = false;

  auto load = [&](const char* name, json& out) {
    const fs::path p = dir / name;
    if (!fs::exists(p)) return false;
    std::ifstream in(p);
    in >> out;
    return true;
  };

  json j;
  if (load("stats.json", j)) {
    CorpusStats stats;
    stats.documents = j.at("documents").get<std::size_t>();
    stats.sentences_per_document = j.at("sentences_per_document").get<double>();
    stats.mentions = j.at("mentions").get<std::size_t>();
    stats.first_mentions = j.at("first_mentions").get<std::size_t>();
    stats.first_mention_fraction = j.at("first_mention_fraction").get<double>();
    for (const auto& [k, v] : j.at("form_counts").items())
      stats.form_counts[form_from_string(k)] = v.get<std::size_t>();
    for (const auto& [k, v] : j.at("entity_mention_counts").items())
      stats.entity_mention_counts[k] = v.get<std::size_t>();
    std::cout << "== stats.json ==\n" << render_corpus_stats_text(stats) << "\n";
    rendered = true;
  }
  if (load("evaluation.json", j)) {
    const LabelScheme scheme(scheme_from_string(j.at("scheme").get<std::string>()));
    EvalMetrics m;
    const json& jm = j.at("metrics");
    m.accuracy = jm.at("accuracy").get<double>();
    m.macro_precision = jm.at("macro_precision").get<double>();
    m.macro_recall = jm.at("macro_recall").get<double>();
    m.macro_f1 = jm.at("macro_f1").get<double>();
    m.confusion = jm.at("confusion").get<std::vector<std::vector<std::size_t>>>();
    for (const auto& jc : jm.at("per_class"))
      m.per_class.push_back({jc.at("label").get<std::string>(),
                             jc.at("support").get<std::size_t>(),
                             jc.at("precision").get<double>(), jc.at("recall").get<double>(),
                             jc.at("f1").get<double>()});
    std::cout << "== evaluation.json ==\n" << render_single_eval_text(m, scheme) << "\n";
    rendered = true;
  }
  if (load("probe_report.json", j)) {
    ProbeReport report;
    for (const auto& jt : j.at("tasks")) {
      TaskReport t;
      t.task = jt.at("task").get<std::string>();
      t.num_classes = jt.at("classes").get<int>();
      t.random = {jt.at("random").at("accuracy").get<double>(),
                  jt.at("random").at("macro_f1").get<double>()};
      t.majority = {jt.at("majority").at("accuracy").get<double>(),
                    jt.at("majority").at("macro_f1").get<double>()};
      auto scores = [](const json& js) {
        ProbeScores s;
        s.accuracy = js.at("accuracy").get<double>();
        s.macro_f1 = js.at("macro_f1").get<double>();
        s.per_seed_accuracy = js.at("per_seed_accuracy").get<std::vector<double>>();
        s.per_seed_macro_f1 = js.at("per_seed_macro_f1").get<std::vector<double>>();
        return s;
      };
      t.probe = scores(jt.at("probe"));
      if (jt.contains("control_shuffled")) {
        t.control_shuffled = scores(jt.at("control_shuffled"));
        report.has_shuffled_control = true;
      }
      if (jt.contains("control_untrained")) {
        t.control_untrained = scores(jt.at("control_untrained"));
        report.has_untrained_control = true;
      }
      report.tasks.push_back(std::move(t));
    }
    std::cout << "== probe_report.json ==\n" << render_probe_grid_text(report) << "\n";
    rendered = true;
  }
  if (load("importance.json", j)) {
    PermutationImportance imp;
    imp.baseline_loss = j.at("baseline_loss").get<double>();
    imp.repetitions = j.at("repetitions").get<int>();
    for (const auto& jf : j.at("features")) {
      imp.features.push_back(jf.at("feature").get<std::string>());
      imp.mean_loss_increase.push_back(jf.at("mean_loss_increase").get<double>());
      imp.std_loss_increase.push_back(jf.at("std_loss_increase").get<double>());
    }
    std::cout << "== importance.json ==\n" << render_importance_text(imp) << "\n";
    rendered = true;
  }
  if (load("shapley.json", j)) {
    ShapleyResult s;
    s.explained_class = j.at("explained_class").get<int>();
    s.orderings = j.at("orderings").get<int>();
    s.instance_value = j.at("instance_value").get<double>();
    s.mean_background_value = j.at("mean_background_value").get<double>();
    for (const auto& jf : j.at("features")) {
      s.features.push_back(jf.at("feature").get<std::string>());
      s.mean_contribution.push_back(jf.at("mean_contribution").get<double>());
      s.per_ordering.push_back(jf.at("per_ordering").get<std::vector<double>>());
    }
    std::cout << "== shapley.json ==\n" << render_shapley_text(s) << "\n";
    rendered = true;
  }
  if (load("eval_report.json", j)) {
    const LabelScheme scheme(scheme_from_string(j.at("scheme").get<std::string>()));
    EvalReport report;
    for (const auto& js : j.at("per_seed")) {
      report.seeds.push_back(js.at("seed").get<std::uint64_t>());
      EvalMetrics m;
      m.accuracy = js.at("accuracy").get<double>();
      m.macro_precision = js.at("macro_precision").get<double>();
      m.macro_recall = js.at("macro_recall").get<double>();
      m.macro_f1 = js.at("macro_f1").get<double>();
      m.confusion = js.at("confusion").get<std::vector<std::vector<std::size_t>>>();
      for (const auto& jc : js.at("per_class"))
        m.per_class.push_back({jc.at("label").get<std::string>(),
                               jc.at("support").get<std::size_t>(),
                               jc.at("precision").get<double>(), jc.at("recall").get<double>(),
                               jc.at("f1").get<double>()});
      report.per_seed.push_back(std::move(m));
    }
    const json& mean = j.at("mean");
    report.mean_accuracy = mean.at("accuracy").get<double>();
    report.mean_macro_precision = mean.at("macro_precision").get<double>();
    report.mean_macro_recall = mean.at("macro_recall").get<double>();
    report.mean_macro_f1 = mean.at("macro_f1").get<double>();
    std::cout << "== eval_report.json ==\n" << render_eval_report_text(report, scheme) << "\n";
    rendered = true;
  }
  if (!rendered) throw ConfigError("no machine-readable reports found in " + dir_str);
  return 0;
}

}  // namespace
