// Acceptance suite: one line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "refsel/corpus.hpp"
#include "refsel/features.hpp"
#include "refsel/gbdt.hpp"
#include "refsel/gradcheck.hpp"
#include "refsel/importance.hpp"
#include "refsel/models.hpp"
#include "refsel/nn/layers.hpp"
#include "refsel/probing.hpp"
#include "refsel/reports.hpp"
#include "refsel/training.hpp"

using namespace refsel;
namespace fs = std::filesystem;

namespace {

const std::string kTool = REFSEL_TOOL_PATH;

int g_passed = 0, g_failed = 0;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void report(int number, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d %-22s %s\n", pass ? "PASS" : "FAIL", number, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  (pass ? g_passed : g_failed) += 1;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

// ---- criterion 1: gradient fidelity --------------------------------------

void criterion1() {
  const auto start = std::chrono::steady_clock::now();
  const int status = std::system((kTool + " gradcheck > /dev/null 2>&1").c_str());
  const double elapsed = seconds_since(start);
  const bool cli_ok = WIFEXITED(status) && WEXITSTATUS(status) == 0;

  const std::vector<GradCheckCase> cases = run_gradcheck_suite(1e-4);
  double worst = 0.0;
  bool all = cases.size() == 7;
  std::set<std::string> names;
  for (const GradCheckCase& c : cases) {
    names.insert(c.name);
    all = all && c.report.pass;
    worst = std::max(worst, c.report.max_rel_error);
  }
  for (const char* required : {"gru_step", "bigru_encode", "self_attention", "dense_relu",
                               "softmax_xent", "conatt", "crnn"})
    all = all && names.count(required) > 0;
  const bool pass = cli_ok && all && worst < 1e-4 && elapsed < 60.0;
  report(1, "gradient fidelity", pass,
         fmt("max rel err %.2e (< 1e-4), %.1fs (< 60s), gradcheck exit ok", worst, elapsed) +
             (cli_ok ? "" : " [CLI FAILED]"));
}

// ---- criterion 2: feature-extraction oracle -------------------------------

void criterion2() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(20240817);
  CorpusSplit split;
  for (int i = 0; i < 1000; ++i) split.documents.push_back(refsel::test::random_document(rng, i));
  EntityMetaTable meta;
  for (int e = 0; e < 5; ++e) {
    const std::string id = "E" + std::to_string(e);
    meta.emplace(id, EntityMeta{id, static_cast<EntityType>(e % 5), static_cast<Gender>(e % 3)});
  }
  Corpus whole;
  whole.train = split;
  const auto counts = corpus_entity_counts(whole);
  const QuantileBounds bounds = fit_distance_quantiles(split);
  const FeatureTable table = extract_all(split, meta, counts, bounds);

  std::size_t rows = 0, mismatches = 0;
  for (const Document& doc : split.documents) {
    for (std::size_t m = 0; m < doc.mentions.size(); ++m, ++rows) {
      if (!(table.rows[rows] ==
            refsel::test::naive_features(doc, static_cast<int>(m), meta, counts, bounds)))
        ++mismatches;
    }
  }

  // hand-derived fixture rows
  bool fixture_ok = true;
  {
    CorpusSplit one;
    one.documents.push_back(refsel::test::table1_document());
    Corpus c1;
    c1.train = one;
    const FeatureTable t1 =
        extract_all(one, {}, corpus_entity_counts(c1), fit_distance_quantiles(one));
    const FeatureVector& awh2 = t1.rows[4];
    fixture_ok = fixture_ok && awh2.dis_stat == DisStat::discourse_old;
    fixture_ok = fixture_ok && awh2.sen_stat == SenStat::sentence_new;
    fixture_ok = fixture_ok && awh2.dist_ant == DistAnt::one_away;
    fixture_ok = fixture_ok && awh2.int_ref == IntRef::previous_different;
    fixture_ok = fixture_ok && awh2.loc_pro == Prominence::prominent;
    fixture_ok = fixture_ok && awh2.glo_pro == Prominence::prominent;
    fixture_ok = fixture_ok && awh2.meta_pro == MetaPro::b0_50;
    fixture_ok = fixture_ok && t1.rows[8].dist_ant == DistAnt::more_than_one;
    fixture_ok = fixture_ok && t1.rows[6].dist_ant == DistAnt::first_mention;
    fixture_ok = fixture_ok && t1.rows[0].sent_1 && !t1.rows[6].sent_1 && !t1.rows[7].sent_1;
    fixture_ok = fixture_ok && t1.rows[2].glo_pro == Prominence::not_prominent;
  }
  const double elapsed = seconds_since(start);
  const bool pass = mismatches == 0 && rows > 0 && fixture_ok && elapsed < 10.0;
  std::ostringstream detail;
  detail << rows << " mentions field-exact over 1000 docs, fixture "
         << (fixture_ok ? "ok" : "FAIL") << ", " << fmt("%.1fs (< 10s)", elapsed);
  report(2, "feature oracle", pass, detail.str());
}

// ---- criterion 3: metric fixtures -----------------------------------------

void criterion3() {
  const EvalMetrics m = metrics_from_confusion({{2, 0}, {1, 1}}, {"a", "b"});
  const bool macro_ok = std::abs(m.macro_f1 - 11.0 / 15.0) < 1e-9;  // prints as 0.7333
  const bool accuracy_ok = m.accuracy == 0.75;  // trace/sum = 3/4 exactly

  bool trace_ok = true, majority_ok = true;
  Rng rng(5150);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 2 + static_cast<int>(rng.uniform_int(4));
    const int n = 1 + static_cast<int>(rng.uniform_int(400));
    std::vector<int> gold(n), pred(n);
    std::vector<std::size_t> counts(k, 0);
    for (int i = 0; i < n; ++i) {
      gold[i] = static_cast<int>(rng.uniform_int(k));
      pred[i] = static_cast<int>(rng.uniform_int(k));
      ++counts[gold[i]];
    }
    const EvalMetrics em = evaluate_predictions(gold, pred, std::vector<std::string>(k, ""));
    std::size_t trace = 0, total = 0;
    for (int c = 0; c < k; ++c) {
      trace += em.confusion[c][c];
      for (int p = 0; p < k; ++p) total += em.confusion[c][p];
    }
    trace_ok = trace_ok && em.accuracy == static_cast<double>(trace) / total;

    const BaselineScores maj = majority_baseline(gold, gold, k);
    const double freq =
        static_cast<double>(*std::max_element(counts.begin(), counts.end())) / n;
    majority_ok = majority_ok && maj.accuracy == freq;
  }
  const bool pass = macro_ok && accuracy_ok && trace_ok && majority_ok;
  report(3, "metric fixtures", pass,
         fmt("macro-F1 %.4f (target 0.7333 within 1e-9), accuracy/majority exact on 100 sets",
             m.macro_f1));
}

// ---- criteria 4+5: planted-rule learning and probing signal ---------------

struct TrainedPair {
  ProtocolResult crnn, conatt;
  Corpus corpus;
  bool trained = false;
};

TrainConfig planted_config(Architecture arch) {
  TrainConfig config;
  config.arch = arch;
  config.scheme = SchemeArity::two_way;
  config.epochs = 30;
  config.batch_size = 16;
  config.learning_rate = 3e-3;
  config.patience = 8;
  config.embedding_dim = 12;
  config.hidden_size = 24;
  config.attention_dim = 24;
  config.rep_dim = 24;
  return config;
}

TrainedPair criterion4() {
  TrainedPair out;
  SynthConfig sc;
  sc.documents = 3000;
  sc.entity_inventory = 12;
  sc.noise_rate = 0.0;
  out.corpus = synthesize_corpus(sc, 314159).corpus;
  std::size_t mentions = 0;
  for (const CorpusSplit* s : {&out.corpus.train, &out.corpus.dev, &out.corpus.test})
    for (const Document& d : s->documents) mentions += d.mentions.size();

  bool pass = mentions >= 2000;
  std::ostringstream detail;
  detail << mentions << " mentions";
  for (Architecture arch : {Architecture::crnn, Architecture::conatt}) {
    const auto start = std::chrono::steady_clock::now();
    ProtocolResult result = run_protocol(planted_config(arch), out.corpus, 271828, 1, 1);
    const double elapsed = seconds_since(start);
    const double f1 = result.report.per_seed[0].macro_f1;
    pass = pass && f1 >= 0.95 && elapsed < 300.0;
    detail << fmt((std::string(", ") + to_string(arch) + " F1 %.4f in %.0fs").c_str(), f1,
                  elapsed);
    (arch == Architecture::crnn ? out.crnn : out.conatt) = std::move(result);
  }
  detail << " (targets: >= 0.95, < 300s each)";
  out.trained = pass;
  report(4, "planted-rule learning", pass, detail.str());
  return out;
}

void criterion5(TrainedPair& pair) {
  if (!pair.trained) {
    report(5, "probing signal", false, "skipped: criterion 4 failed");
    return;
  }
  // probe the architecture with the better dev score
  const ProtocolResult& best =
      pair.conatt.runs[0].log.best_dev_macro_f1 >= pair.crnn.runs[0].log.best_dev_macro_f1
          ? pair.conatt
          : pair.crnn;
  ProbeConfig config;
  config.trainings = 5;
  config.logistic.max_iterations = 200;
  config.control_shuffled = true;
  config.jobs = 2;
  const ProbeReport probes = run_probe_suite(best.runs[0].model, pair.corpus, config, 161803);

  bool pass = true;
  std::ostringstream detail;
  for (const TaskReport& t : probes.tasks) {
    if (t.task != "DisStat" && t.task != "Syn") continue;
    const double margin = t.probe.macro_f1 - t.majority.macro_f1;
    const bool task_ok = margin >= 0.15 && t.control_shuffled.macro_f1 < t.probe.macro_f1;
    pass = pass && task_ok;
    detail << t.task << fmt(" +%.3f over majority (shuffled %.3f < probe %.3f)  ", margin,
                            t.control_shuffled.macro_f1, t.probe.macro_f1);
  }
  report(5, "probing signal", pass, detail.str());
}

// ---- criterion 6: attention/softmax invariants -----------------------------

void criterion6() {
  Rng rng(7777);
  nn::ParamStore ps;
  nn::init_attention_params(ps, "a", 4, 3, rng);
  bool attention_ok = true, softmax_ok = true, dist_ok = true;

  for (int trial = 0; trial < 10000; ++trial) {
    nn::Tape tape;
    const nn::AttentionNodes nodes = nn::attention_param_nodes(tape, ps, "a");
    const int n = 1 + static_cast<int>(rng.uniform_int(8));
    std::vector<nn::Tensor2> hs;
    for (int i = 0; i < n; ++i) {
      nn::Tensor2 h(1, 4);
      for (double& v : h.data) v = rng.uniform(-4.0, 4.0);
      hs.push_back(std::move(h));
    }
    std::vector<nn::Tape::Id> ids;
    for (const nn::Tensor2& h : hs) ids.push_back(tape.leaf(h));
    const nn::AttentionResult res = nn::self_attention(tape, nodes, ids);
    double sum = 0.0;
    for (double w : tape.value(res.weights).data) sum += w;
    attention_ok = attention_ok && std::abs(sum - 1.0) < 1e-9;
  }

  for (int trial = 0; trial < 10000; ++trial) {
    const int k = 2 + static_cast<int>(rng.uniform_int(5));
    nn::Tensor2 logits(1, k), shifted(1, k);
    const double c = rng.uniform(-50.0, 50.0);
    for (int j = 0; j < k; ++j) {
      logits.data[j] = rng.uniform(-8.0, 8.0);
      shifted.data[j] = logits.data[j] + c;
    }
    const auto [p1, l1] = nn::softmax_xent(logits, 0);
    const auto [p2, l2] = nn::softmax_xent(shifted, 0);
    for (int j = 0; j < k; ++j)
      softmax_ok = softmax_ok && std::abs(p1.data[j] - p2.data[j]) < 1e-12;
  }

  ModelConfig mc;
  mc.arch = Architecture::conatt;
  mc.vocab_size = 12;
  mc.num_classes = 4;
  mc.embedding_dim = 4;
  mc.hidden_size = 5;
  mc.attention_dim = 4;
  mc.rep_dim = 6;
  RfsModel model(mc, 13);
  for (int trial = 0; trial < 300; ++trial) {
    ModelInput in;
    for (std::size_t i = rng.uniform_int(6); i > 0; --i)
      in.pre_context.push_back(static_cast<int>(rng.uniform_int(12)));
    in.target = static_cast<int>(rng.uniform_int(12));
    for (std::size_t i = rng.uniform_int(6); i > 0; --i)
      in.pos_context.push_back(static_cast<int>(rng.uniform_int(12)));
    const auto [rep, probs] = model.infer(in);
    double sum = 0.0;
    for (double p : probs) sum += p;
    dist_ok = dist_ok && std::abs(sum - 1.0) < 1e-9;
  }

  const bool pass = attention_ok && softmax_ok && dist_ok;
  std::ostringstream detail;
  detail << "attention sum-to-1 " << (attention_ok ? "ok" : "FAIL") << ", softmax shift "
         << (softmax_ok ? "ok" : "FAIL") << ", form distribution " << (dist_ok ? "ok" : "FAIL")
         << " over 10000/10000/300 cases";
  report(6, "attention/softmax", pass, detail.str());
}

// ---- criterion 7: gbdt properties ------------------------------------------

void criterion7() {
  SynthConfig sc;
  sc.documents = 250;
  const Corpus corpus = synthesize_corpus(sc, 999).corpus;
  const FeatureTable table = extract_all(corpus.train, corpus.meta, corpus_entity_counts(corpus),
                                         fit_distance_quantiles(corpus.train));
  const EncodedFeatures features = encode_features(table, probing_feature_set());
  const LabelScheme scheme(SchemeArity::four_way);
  const std::vector<int> labels = gold_classes(corpus.train, scheme);

  GbdtConfig config;
  config.rounds = 50;
  config.subsample = 1.0;
  const GbdtTrainResult r = train_gbdt(features, labels, 4, config, 10101, false);

  bool monotone = r.train_log_loss.size() == 50;
  for (std::size_t i = 1; i < r.train_log_loss.size(); ++i)
    monotone = monotone && r.train_log_loss[i] <= r.train_log_loss[i - 1] + 1e-12;
  const bool depth_ok = r.model.max_tree_depth() <= 5;
  const bool gain_ok = r.model.min_realized_gain() >= 0.01;

  EncodedFeatures single;
  single.group_names = {"flag"};
  single.group_ranges = {{0, 1}};
  single.column_names = {"flag"};
  std::vector<int> ylabels;
  for (int i = 0; i < 60; ++i) {
    single.rows.push_back({static_cast<double>(i % 2)});
    ylabels.push_back(i % 2);
  }
  GbdtConfig one;
  one.rounds = 1;
  one.subsample = 1.0;
  const GbdtTrainResult fixture = train_gbdt(single, ylabels, 2, one, 7, false);
  int errors = 0;
  for (std::size_t i = 0; i < single.rows.size(); ++i)
    errors += fixture.model.predict(single.rows[i]) != ylabels[i];
  const bool fixture_ok = errors == 0 && fixture.model.max_tree_depth() == 1;

  const bool pass = monotone && depth_ok && gain_ok && fixture_ok;
  std::ostringstream detail;
  detail << "loss monotone over 50 rounds " << (monotone ? "ok" : "FAIL") << ", max depth "
         << r.model.max_tree_depth() << " (<= 5), min gain "
         << fmt("%.4f (>= 0.01)", r.model.min_realized_gain()) << ", 1-round fixture "
         << (fixture_ok ? "ok" : "FAIL");
  report(7, "gbdt properties", pass, detail.str());
}

// ---- criterion 8: importance properties ------------------------------------

void criterion8() {
  EncodedFeatures planted;
  planted.group_names = {"informative", "noise"};
  planted.group_ranges = {{0, 1}, {1, 2}};
  planted.column_names = {"informative", "noise"};
  std::vector<int> labels;
  Rng rng(2024);
  for (int i = 0; i < 300; ++i) {
    const int y = i % 2;
    planted.rows.push_back({static_cast<double>(y), rng.uniform(-1.0, 1.0)});
    labels.push_back(y);
  }
  GbdtConfig config;
  config.rounds = 20;
  config.subsample = 1.0;
  const GbdtTrainResult r = train_gbdt(planted, labels, 2, config, 55, false);

  const PermutationImportance base = permutation_importance(r.model, planted, labels, 5, 1);
  const bool unused_zero = r.model.used_columns() == std::set<int>{0} &&
                           base.mean_loss_increase[1] == 0.0;

  int wins = 0;
  for (int seed = 0; seed < 100; ++seed) {
    const PermutationImportance imp = permutation_importance(r.model, planted, labels, 1, seed);
    if (imp.mean_loss_increase[0] > imp.mean_loss_increase[1]) ++wins;
  }

  const ShapleyResult s = shapley_sample(r.model, planted, planted.rows[1], 1, 100, 77);
  double sum = 0.0;
  for (double c : s.mean_contribution) sum += c;
  // standard error of the per-ordering totals
  std::vector<double> totals(s.orderings, 0.0);
  for (int t = 0; t < s.orderings; ++t)
    for (std::size_t g = 0; g < s.features.size(); ++g) totals[t] += s.per_ordering[g][t];
  double mean = 0.0;
  for (double t : totals) mean += t;
  mean /= totals.size();
  double var = 0.0;
  for (double t : totals) var += (t - mean) * (t - mean);
  const double se = std::sqrt(var / totals.size() / totals.size());
  const double gap = std::abs(sum - (s.instance_value - s.mean_background_value));
  const bool efficiency_ok = gap <= std::max(3.0 * se, 1e-9);

  const bool pass = unused_zero && wins >= 95 && efficiency_ok;
  std::ostringstream detail;
  detail << "unused importance exactly 0 " << (unused_zero ? "ok" : "FAIL") << ", informative>"
         << "noise in " << wins << "/100 seeds (>= 95), efficiency gap "
         << fmt("%.2e (<= max(3se=%.2e, 1e-9))", gap, 3.0 * se);
  report(8, "importance properties", pass, detail.str());
}

// ---- criterion 9: determinism ---------------------------------------------

bool same_file(const std::string& a, const std::string& b) {
  const std::string ca = refsel::test::read_file(a);
  return !ca.empty() && ca == refsel::test::read_file(b);
}

void criterion9() {
  refsel::test::TempDir tmp("acceptance_det");
  auto sh = [&](const std::string& args) {
    const int status = std::system((kTool + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) && WEXITSTATUS(status) == 0;
  };

  bool pass = true;
  // synthesis
  pass = pass && sh("corpus synth --docs 40 --seed 5 --out " + tmp.file("s1"));
  pass = pass && sh("corpus synth --docs 40 --seed 5 --out " + tmp.file("s2"));
  pass = pass && same_file(tmp.file("s1") + "/train.jsonl", tmp.file("s2") + "/train.jsonl");
  pass = pass && same_file(tmp.file("s1") + "/manifest.json", tmp.file("s2") + "/manifest.json");

  // the full 5-seed protocol, twice, then once more from the manifest's
  // resolved config
  const std::string corpus_flags = " --train " + tmp.file("s1") + "/train.jsonl --dev " +
                                   tmp.file("s1") + "/dev.jsonl --test " + tmp.file("s1") +
                                   "/test.jsonl --meta " + tmp.file("s1") + "/entities.json";
  const std::string train_args = "train" + corpus_flags +
                                 " --arch conatt --scheme 2-way --epochs 2 --runs 5 --hidden 6 "
                                 "--embedding-dim 6 --rep-dim 6 --attention-dim 6 --seed 21 "
                                 "--out ";
  pass = pass && sh(train_args + tmp.file("t1"));
  pass = pass && sh(train_args + tmp.file("t2"));
  pass = pass && sh("train --config " + tmp.file("t1") + "/resolved.cfg --out " + tmp.file("t3"));
  for (const char* name : {"eval_report.json", "train_log.json", "checkpoint_best.json"}) {
    pass = pass && same_file(tmp.file("t1") + "/" + name, tmp.file("t2") + "/" + name);
    pass = pass && same_file(tmp.file("t1") + "/" + name, tmp.file("t3") + "/" + name);
  }

  // probing and importance reports
  const std::string ckpt = tmp.file("t1") + "/checkpoint_best.json";
  const std::string probe_args = "probe --checkpoint " + ckpt + corpus_flags +
                                 " --trainings 2 --max-iters 30 --seed 4 --out ";
  pass = pass && sh(probe_args + tmp.file("p1"));
  pass = pass && sh(probe_args + tmp.file("p2"));
  pass = pass && same_file(tmp.file("p1") + "/probe_report.json",
                           tmp.file("p2") + "/probe_report.json");

  const std::string imp_args = "importance permute" + corpus_flags +
                               " --scheme 2-way --rounds 8 --reps 3 --seed 6 --out ";
  pass = pass && sh(imp_args + tmp.file("i1"));
  pass = pass && sh(imp_args + tmp.file("i2"));
  pass = pass &&
         same_file(tmp.file("i1") + "/importance.json", tmp.file("i2") + "/importance.json");

  report(9, "determinism", pass,
         "synth, 5-seed protocol (direct + from manifest config), probe and importance "
         "reports byte-identical");
}

}  // namespace

int main() {
  std::printf("acceptance suite (tool: %s)\n", kTool.c_str());
  criterion1();
  criterion2();
  criterion3();
  TrainedPair pair = criterion4();
  criterion5(pair);
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  std::printf("acceptance: %d/%d criteria passed\n", g_passed, g_passed + g_failed);
  return g_failed == 0 ? 0 : 1;
}
