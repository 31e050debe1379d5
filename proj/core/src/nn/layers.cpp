#include "refsel/nn/layers.hpp"

#include <algorithm>
#include <cmath>

#include "refsel/errors.hpp"
#include "refsel/seeding.hpp"

namespace refsel::nn {

void init_gru_params(ParamStore& ps, const std::string& prefix, int input_dim, int hidden_size,
                     Rng& rng) {
  ps.add(prefix + ".update_x", glorot_uniform(input_dim, hidden_size, rng));
  ps.add(prefix + ".update_h", glorot_uniform(hidden_size, hidden_size, rng));
  ps.add(prefix + ".reset_x", glorot_uniform(input_dim, hidden_size, rng));
  ps.add(prefix + ".reset_h", glorot_uniform(hidden_size, hidden_size, rng));
  ps.add(prefix + ".cand_x", glorot_uniform(input_dim, hidden_size, rng));
  ps.add(prefix + ".cand_h", glorot_uniform(hidden_size, hidden_size, rng));
}

GruNodes gru_param_nodes(Tape& tape, ParamStore& ps, const std::string& prefix) {
  GruNodes n;
  n.update_x = tape.param(ps, prefix + ".update_x");
  n.update_h = tape.param(ps, prefix + ".update_h");
  n.reset_x = tape.param(ps, prefix + ".reset_x");
  n.reset_h = tape.param(ps, prefix + ".reset_h");
  n.cand_x = tape.param(ps, prefix + ".cand_x");
  n.cand_h = tape.param(ps, prefix + ".cand_h");
  return n;
}

Tape::Id gru_step(Tape& tape, const GruNodes& p, Tape::Id x_t, Tape::Id h_prev) {
  const Tape::Id z = tape.sigmoid(
      tape.add(tape.matmul(x_t, p.update_x), tape.matmul(h_prev, p.update_h)));
  const Tape::Id r = tape.sigmoid(
      tape.add(tape.matmul(x_t, p.reset_x), tape.matmul(h_prev, p.reset_h)));
  const Tape::Id cand = tape.tanh(
      tape.add(tape.matmul(x_t, p.cand_x), tape.matmul(tape.mul(r, h_prev), p.cand_h)));
  return tape.add(tape.mul(z, h_prev), tape.mul(tape.one_minus(z), cand));
}

std::vector<Tape::Id> gru_encode(Tape& tape, const GruNodes& p, std::span<const Tape::Id> inputs,
                                 int hidden_size) {
  if (inputs.empty()) throw ValidationError("gru_encode: empty sequence");
  std::vector<Tape::Id> states;
  states.reserve(inputs.size());
  Tape::Id h = tape.constant(Tensor2::zeros(1, hidden_size));
  for (Tape::Id x : inputs) {
    h = gru_step(tape, p, x, h);
    states.push_back(h);
  }
  return states;
}

std::vector<Tape::Id> bigru_encode(Tape& tape, const GruNodes& fwd, const GruNodes& bwd,
                                   std::span<const Tape::Id> inputs, int hidden_size) {
  if (inputs.empty()) throw ValidationError("bigru_encode: empty sequence");
  std::vector<Tape::Id> forward = gru_encode(tape, fwd, inputs, hidden_size);
  std::vector<Tape::Id> reversed(inputs.rbegin(), inputs.rend());
  std::vector<Tape::Id> backward = gru_encode(tape, bwd, reversed, hidden_size);
  std::vector<Tape::Id> out;
  out.reserve(inputs.size());
  const std::size_t n = inputs.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Tape::Id parts[2] = {forward[i], backward[n - 1 - i]};
    out.push_back(tape.concat_cols(parts));
  }
  return out;
}

void init_attention_params(ParamStore& ps, const std::string& prefix, int input_width,
                           int attention_dim, Rng& rng) {
  ps.add(prefix + ".score_w", glorot_uniform(attention_dim, input_width, rng));
  ps.add(prefix + ".score_v", glorot_uniform(1, attention_dim, rng));
}

AttentionNodes attention_param_nodes(Tape& tape, ParamStore& ps, const std::string& prefix) {
  AttentionNodes n;
  n.score_w = tape.param(ps, prefix + ".score_w");
  n.score_v = tape.param(ps, prefix + ".score_v");
  return n;
}

AttentionResult self_attention(Tape& tape, const AttentionNodes& p,
                               std::span<const Tape::Id> steps) {
  if (steps.empty()) throw ValidationError("self_attention: empty sequence");
  std::vector<Tape::Id> scores;
  scores.reserve(steps.size());
  for (Tape::Id h : steps) {
    const Tape::Id u = tape.tanh(tape.matmul(h, p.score_w, false, true));  // 1 x att
    scores.push_back(tape.matmul(u, p.score_v, false, true));             // 1 x 1
  }
  const Tape::Id e = tape.concat_cols(scores);  // 1 x N
  const Tape::Id alpha = tape.softmax_row(e);
  const Tape::Id stacked = tape.stack_rows(steps);  // N x width
  AttentionResult res;
  res.context = tape.matmul(alpha, stacked);  // 1 x width
  res.weights = alpha;
  return res;
}

Tape::Id dense_relu(Tape& tape, Tape::Id w, Tape::Id x, Tape::Id bias) {
  Tape::Id pre = tape.matmul(x, w, false, true);
  if (bias >= 0) pre = tape.add(pre, bias);
  return tape.relu(pre);
}

std::pair<Tensor2, double> softmax_xent(const Tensor2& logits, int gold) {
  if (logits.rows != 1 || logits.cols < 2)
    throw ValidationError("softmax_xent: need a 1xK row, K >= 2");
  if (gold < 0 || gold >= logits.cols)
    throw ValidationError("softmax_xent: gold class out of range");
  Tensor2 probs = logits;
  const double hi = *std::max_element(probs.data.begin(), probs.data.end());
  double sum = 0.0;
  for (double& x : probs.data) {
    x = std::exp(x - hi);
    sum += x;
  }
  for (double& x : probs.data) x /= sum;
  const double loss = -std::log(probs.data[gold]);
  return {std::move(probs), loss};
}

}  // namespace refsel::nn
