#include "refsel/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "refsel/errors.hpp"
#include "refsel/parallel.hpp"
#include "refsel/seeding.hpp"

namespace refsel {

namespace {

ModelConfig model_config_from(const TrainConfig& config, int vocab_size, int num_classes) {
  ModelConfig mc;
  mc.arch = config.arch;
  mc.vocab_size = vocab_size;
  mc.num_classes = num_classes;
  mc.embedding_dim = config.embedding_dim;
  mc.hidden_size = config.hidden_size;
  mc.attention_dim = config.attention_dim;
  mc.rep_dim = config.rep_dim;
  mc.max_context = config.max_context;
  mc.use_bias = config.use_bias;
  return mc;
}

std::vector<int> predict_all(RfsModel& model, const std::vector<ModelInput>& inputs) {
  std::vector<int> predicted;
  predicted.reserve(inputs.size());
  for (const ModelInput& input : inputs) {
    const auto [rep, probs] = model.infer(input);
    predicted.push_back(static_cast<int>(
        std::max_element(probs.begin(), probs.end()) - probs.begin()));
  }
  return predicted;
}

double dev_macro_f1(RfsModel& model, const std::vector<ModelInput>& inputs,
                    const std::vector<int>& gold, const LabelScheme& scheme) {
  std::vector<std::string> names;
  for (int c = 0; c < scheme.num_classes(); ++c) names.push_back(scheme.class_name(c));
  return evaluate_predictions(gold, predict_all(model, inputs), names).macro_f1;
}

// Batches group mentions of similar padded length (stable sort by total
// sequence length, then fixed-size chunks). Examples are processed
// exactly, so no mention ever sees PAD steps.
std::vector<std::vector<std::size_t>> make_batches(const std::vector<ModelInput>& inputs,
                                                   int batch_size) {
  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return inputs[a].total_length() < inputs[b].total_length();
  });
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < order.size(); i += batch_size) {
    const std::size_t end = std::min(order.size(), i + batch_size);
    batches.emplace_back(order.begin() + i, order.begin() + end);
  }
  return batches;
}

}  // namespace

TrainResult train(const TrainConfig& config, const Corpus& corpus, const Vocabulary& vocab,
                  std::uint64_t seed) {
  if (config.epochs < 1) throw ConfigError("train: epochs must be at least 1");
  if (config.batch_size < 1) throw ConfigError("train: batch_size must be at least 1");
  if (corpus.train.documents.empty() || corpus.dev.documents.empty())
    throw ValidationError("train: empty train or dev split");

  const LabelScheme scheme(config.scheme);
  const ModelConfig mc = model_config_from(config, vocab.size(), scheme.num_classes());
  RfsModel model(mc, seed);

  TrainResult result;
  if (!config.embeddings_file.empty()) {
    const EmbeddingLoadReport rep = load_pretrained_embeddings(
        config.embeddings_file, vocab, model.params().value("embedding"));
    result.log.embedding_coverage = rep.coverage;
  }

  const std::vector<ModelInput> train_inputs =
      build_inputs(corpus.train, vocab, config.max_context);
  const std::vector<int> train_gold = gold_classes(corpus.train, scheme);
  const std::vector<ModelInput> dev_inputs = build_inputs(corpus.dev, vocab, config.max_context);
  const std::vector<int> dev_gold = gold_classes(corpus.dev, scheme);
  if (train_inputs.empty() || dev_inputs.empty())
    throw ValidationError("train: no mentions in train or dev split");

  const std::vector<std::vector<std::size_t>> batches =
      make_batches(train_inputs, config.batch_size);

  auto optimizer = nn::make_optimizer(config.optimizer, config.learning_rate);

  nn::ParamStore best_params = model.params();
  double best_f1 = -1.0;
  int best_epoch = -1;
  int stale = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<std::size_t> batch_order(batches.size());
    std::iota(batch_order.begin(), batch_order.end(), 0);
    Rng shuffler(derive_seed(seed, "train.epoch", epoch));
    shuffler.shuffle(batch_order);

    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    bool diverged = false;
    for (std::size_t bi : batch_order) {
      const std::vector<std::size_t>& batch = batches[bi];
      model.params().zero_grads();
      double batch_loss = 0.0;
      for (std::size_t idx : batch) {
        nn::Tape tape;
        const RfsModel::Forward f = model.forward(tape, train_inputs[idx], train_gold[idx]);
        const nn::Tape::Id scaled = tape.scale(f.loss, 1.0 / batch.size());
        batch_loss += tape.value(f.loss).at(0, 0);
        tape.backward(scaled);
      }
      if (!std::isfinite(batch_loss)) {
        diverged = true;
        break;
      }
      optimizer->step(model.params());
      loss_sum += batch_loss;
      loss_count += batch.size();
    }
    if (diverged) {
      result.log.diverged = true;
      break;
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / loss_count;
    record.dev_macro_f1 = dev_macro_f1(model, dev_inputs, dev_gold, scheme);
    record.improved = record.dev_macro_f1 > best_f1;
    result.log.epochs.push_back(record);

    if (record.improved) {
      best_f1 = record.dev_macro_f1;
      best_epoch = epoch;
      best_params = model.params();
      stale = 0;
    } else {
      ++stale;
      if (stale > config.patience) break;
    }
  }

  if (best_epoch < 0) throw NumericalError("train: diverged before completing an epoch");

  result.log.best_epoch = best_epoch;
  result.log.best_dev_macro_f1 = best_f1;
  result.model.config = mc;
  result.model.scheme = config.scheme;
  result.model.vocab = vocab;
  result.model.params = std::move(best_params);
  return result;
}

EvalMetrics evaluate(const TrainedModel& model, const CorpusSplit& split) {
  if (split.documents.empty()) throw ValidationError("evaluate: empty split");
  const LabelScheme scheme(model.scheme);
  std::vector<std::string> names;
  for (int c = 0; c < scheme.num_classes(); ++c) names.push_back(scheme.class_name(c));
  RfsModel rfs = model.instantiate();
  const std::vector<ModelInput> inputs =
      build_inputs(split, model.vocab, model.config.max_context);
  const std::vector<int> gold = gold_classes(split, scheme);
  if (inputs.empty()) throw ValidationError("evaluate: split has no mentions");
  return evaluate_predictions(gold, predict_all(rfs, inputs), names);
}

ProtocolResult run_protocol(const TrainConfig& config, const Corpus& corpus, std::uint64_t seed,
                            int num_runs, int jobs) {
  if (num_runs < 1) throw ConfigError("run_protocol: num_runs must be at least 1");
  const Vocabulary vocab = Vocabulary::fit(corpus.train);

  ProtocolResult out;
  out.runs.resize(num_runs);
  out.report.per_seed.resize(num_runs);
  out.report.seeds.resize(num_runs);
  parallel_for(num_runs, jobs, [&](std::size_t i) {
    const std::uint64_t run_seed = derive_seed(seed, "train.run", i);
    out.report.seeds[i] = run_seed;
    out.runs[i] = train(config, corpus, vocab, run_seed);
    out.report.per_seed[i] = evaluate(out.runs[i].model, corpus.test);
  });

  for (int i = 0; i < num_runs; ++i) {
    const EvalMetrics& m = out.report.per_seed[i];
    out.report.mean_accuracy += m.accuracy;
    out.report.mean_macro_precision += m.macro_precision;
    out.report.mean_macro_recall += m.macro_recall;
    out.report.mean_macro_f1 += m.macro_f1;
    if (out.best_run < 0 ||
        out.runs[i].log.best_dev_macro_f1 > out.runs[out.best_run].log.best_dev_macro_f1)
      out.best_run = i;
  }
  out.report.mean_accuracy /= num_runs;
  out.report.mean_macro_precision /= num_runs;
  out.report.mean_macro_recall /= num_runs;
  out.report.mean_macro_f1 /= num_runs;
  return out;
}

}  // namespace refsel
