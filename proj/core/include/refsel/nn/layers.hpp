#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "refsel/nn/tape.hpp"

namespace refsel {
class Rng;
}

namespace refsel::nn {

// Gated recurrent cell with update gate z, reset gate r and candidate
// state; the update gate interpolates toward the previous state:
//   z = sigmoid(x Wz + h Uz)
//   r = sigmoid(x Wr + h Ur)
//   cand = tanh(x Wc + (r * h) Uc)
//   h' = z * h + (1 - z) * cand
// No bias terms. Parameter names under `prefix`:
//   .update_x .update_h .reset_x .reset_h .cand_x .cand_h

struct GruNodes {
  Tape::Id update_x, update_h, reset_x, reset_h, cand_x, cand_h;
};

void init_gru_params(ParamStore& ps, const std::string& prefix, int input_dim, int hidden_size,
                     Rng& rng);
GruNodes gru_param_nodes(Tape& tape, ParamStore& ps, const std::string& prefix);

Tape::Id gru_step(Tape& tape, const GruNodes& p, Tape::Id x_t, Tape::Id h_prev);

// Runs the cell over the sequence from a zero initial state.
std::vector<Tape::Id> gru_encode(Tape& tape, const GruNodes& p, std::span<const Tape::Id> inputs,
                                 int hidden_size);

// Forward and backward passes concatenated per step; output width 2*hidden.
std::vector<Tape::Id> bigru_encode(Tape& tape, const GruNodes& fwd, const GruNodes& bwd,
                                   std::span<const Tape::Id> inputs, int hidden_size);

// Additive self-attention pooling:
//   e_j = score_v . tanh(score_w h_j),  alpha = softmax(e),  c = sum_j alpha_j h_j
// Parameter names under `prefix`: .score_w (att x width), .score_v (1 x att).
struct AttentionNodes {
  Tape::Id score_w, score_v;
};

void init_attention_params(ParamStore& ps, const std::string& prefix, int input_width,
                           int attention_dim, Rng& rng);
AttentionNodes attention_param_nodes(Tape& tape, ParamStore& ps, const std::string& prefix);

struct AttentionResult {
  Tape::Id context;  // 1 x width
  Tape::Id weights;  // 1 x N
};

AttentionResult self_attention(Tape& tape, const AttentionNodes& p,
                               std::span<const Tape::Id> steps);

// y = relu(x W^T); W is (out x in). Optional bias (1 x out) added pre-relu.
Tape::Id dense_relu(Tape& tape, Tape::Id w, Tape::Id x, Tape::Id bias = -1);

// Standalone stabilized softmax + cross-entropy (no tape).
std::pair<Tensor2, double> softmax_xent(const Tensor2& logits, int gold);

}  // namespace refsel::nn
