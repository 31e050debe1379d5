#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "refsel/corpus.hpp"
#include "refsel/metrics.hpp"
#include "refsel/models.hpp"
#include "refsel/nn/optim.hpp"

namespace refsel {

struct TrainConfig {
  Architecture arch = Architecture::crnn;
  SchemeArity scheme = SchemeArity::four_way;
  int epochs = 30;
  int batch_size = 16;
  double learning_rate = 1e-3;
  nn::OptimizerKind optimizer = nn::OptimizerKind::adam;
  int patience = 5;  // stop once dev macro-F1 stalls for more than this many epochs
  int embedding_dim = 32;
  int hidden_size = 64;
  int attention_dim = 64;
  int rep_dim = 64;
  int max_context = 60;
  bool use_bias = false;
  std::string embeddings_file;  // optional pretrained token vectors
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_macro_f1 = 0.0;
  bool improved = false;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  double best_dev_macro_f1 = 0.0;
  bool diverged = false;
  double embedding_coverage = -1.0;  // -1 when no pretrained file was given
};

struct TrainResult {
  TrainedModel model;  // checkpoint with the best dev macro-F1
  TrainLog log;
};

// One seeded run. Batches group mentions of similar total length; the
// gradient is averaged over the batch. Model selection is dev macro-F1.
// A NaN loss aborts the run and returns the last good checkpoint.
TrainResult train(const TrainConfig& config, const Corpus& corpus, const Vocabulary& vocab,
                  std::uint64_t seed);

// Per-seed evaluation plus arithmetic means over seeds.
struct EvalReport {
  std::vector<std::uint64_t> seeds;
  std::vector<EvalMetrics> per_seed;
  double mean_accuracy = 0.0;
  double mean_macro_precision = 0.0;
  double mean_macro_recall = 0.0;
  double mean_macro_f1 = 0.0;
};

EvalMetrics evaluate(const TrainedModel& model, const CorpusSplit& split);

struct ProtocolResult {
  EvalReport report;             // on the test split
  std::vector<TrainResult> runs;
  int best_run = -1;             // highest dev macro-F1, for probing
};

// The evaluation protocol: train `num_runs` models with seeds derived from
// the master seed, evaluate each on test, report per-seed and mean
// metrics. Runs may execute in parallel (`jobs`); results are ordered by
// run index so the report does not depend on scheduling.
ProtocolResult run_protocol(const TrainConfig& config, const Corpus& corpus, std::uint64_t seed,
                            int num_runs = 5, int jobs = 1);

}  // namespace refsel
