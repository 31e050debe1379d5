#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "refsel/corpus.hpp"
#include "refsel/nn/layers.hpp"
#include "refsel/nn/tape.hpp"
#include "refsel/vocab.hpp"

namespace refsel {

// Two sequence classifiers over delexicalised mention contexts.
//
// conatt: pre- and post-context are encoded by separate BiGRUs, pooled by
// additive self-attention, and concatenated with the raw target embedding:
//   R = relu(combine_w [c_pre; x_target; c_pos])
// An empty context contributes a zero vector.
//
// crnn: one BiGRU reads [pre, target, pos]; the hidden state at the
// target position feeds the same head: R = relu(combine_w h_target).
//
// Both predict softmax(output_w R). R is the representation the probing
// classifiers consume.
//
// Token ids turn into vectors only through the embedding table inside
// forward(); swapping that lookup for a pretrained contextual encoder is
// the seam for richer input representations.

enum class Architecture { conatt, crnn };
std::string to_string(Architecture a);
Architecture architecture_from_string(const std::string& s);

struct ModelInput {
  std::vector<int> pre_context;  // token ids, oldest first
  int target = 0;
  std::vector<int> pos_context;  // token ids following the target

  std::size_t total_length() const { return pre_context.size() + 1 + pos_context.size(); }
};

struct ModelConfig {
  Architecture arch = Architecture::crnn;
  int vocab_size = 0;
  int num_classes = 0;
  int embedding_dim = 32;
  int hidden_size = 64;
  int attention_dim = 64;
  int rep_dim = 64;
  int max_context = 60;  // context window, truncating farthest-from-target first
  bool use_bias = false;
};

class RfsModel {
 public:
  RfsModel(const ModelConfig& config, std::uint64_t seed);
  RfsModel(const ModelConfig& config, nn::ParamStore params);

  const ModelConfig& config() const { return config_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

  struct Forward {
    nn::Tape::Id rep = -1;
    nn::Tape::Id logits = -1;
    nn::Tape::Id loss = -1;  // -1 when no gold label was given
  };

  // Builds the forward graph on the tape. gold < 0 skips the loss node.
  Forward forward(nn::Tape& tape, const ModelInput& input, int gold = -1);

  // Value-only convenience: (representation, class probabilities).
  std::pair<std::vector<double>, std::vector<double>> infer(const ModelInput& input);

 private:
  void check_input(const ModelInput& input) const;

  ModelConfig config_;
  nn::ParamStore params_;
};

// Windowing + id mapping for one mention.
ModelInput make_model_input(const Document& doc, int mention_index, const Vocabulary& vocab,
                            int max_context);

// One input per mention, document order.
std::vector<ModelInput> build_inputs(const CorpusSplit& split, const Vocabulary& vocab,
                                     int max_context);
std::vector<int> gold_classes(const CorpusSplit& split, const LabelScheme& scheme);

// A trained classifier bundled with everything needed to reuse it.
struct TrainedModel {
  ModelConfig config;
  SchemeArity scheme = SchemeArity::four_way;
  Vocabulary vocab;
  nn::ParamStore params;

  RfsModel instantiate() const { return RfsModel(config, params); }
};

// Checkpoint: JSON with architecture, label scheme, vocabulary, config,
// a hash of the canonical config string, and the parameter container.
void save_checkpoint(const TrainedModel& model, const std::string& path);
TrainedModel load_checkpoint(const std::string& path);
std::string config_hash(const ModelConfig& config, SchemeArity scheme);

// --- pretrained embeddings -------------------------------------------------

struct EmbeddingLoadReport {
  std::size_t file_vectors = 0;
  std::size_t matched = 0;
  double coverage = 0.0;  // matched / content vocabulary size
  std::vector<std::string> duplicate_tokens;
};

// Whitespace-separated text: token followed by `dim` numbers per line.
// Matching vocabulary rows are overwritten; a duplicate token keeps its
// last occurrence and is reported.
EmbeddingLoadReport load_pretrained_embeddings(const std::string& path, const Vocabulary& vocab,
                                               nn::Tensor2& embedding);

// --- frozen representations ------------------------------------------------

// One row per mention, document order; parameters stay frozen.
std::vector<std::vector<double>> embed_representations(const TrainedModel& model,
                                                       const CorpusSplit& split);

}  // namespace refsel
