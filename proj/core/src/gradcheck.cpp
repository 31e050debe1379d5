#include "refsel/gradcheck.hpp"

#include "refsel/models.hpp"
#include "refsel/nn/layers.hpp"
#include "refsel/nn/tape.hpp"
#include "refsel/seeding.hpp"

namespace refsel {

namespace {

using nn::GradCheckReport;
using nn::ParamStore;
using nn::Tape;
using nn::Tensor2;

Tensor2 random_tensor(int r, int c, Rng& rng) {
  Tensor2 t(r, c);
  for (double& v : t.data) v = rng.uniform(-1.0, 1.0);
  return t;
}

}  // namespace

std::vector<GradCheckCase> run_gradcheck_suite(double tolerance) {
  std::vector<GradCheckCase> cases;
  Rng rng(20210915);

  const int in_dim = 3, hidden = 4, att = 4;
  std::vector<Tensor2> xs;
  for (int i = 0; i < 6; ++i) xs.push_back(random_tensor(1, in_dim, rng));
  const Tensor2 h0 = random_tensor(1, hidden, rng);

  {
    ParamStore ps;
    nn::init_gru_params(ps, "g", in_dim, hidden, rng);
    auto loss_fn = [&](ParamStore& p, bool with_grad) {
      Tape tape;
      const nn::GruNodes g = nn::gru_param_nodes(tape, p, "g");
      const Tape::Id out = nn::gru_step(tape, g, tape.leaf(xs[0]), tape.leaf(h0));
      const Tape::Id loss = tape.softmax_xent(out, 1);
      if (with_grad) tape.backward(loss);
      return tape.value(loss).at(0, 0);
    };
    cases.push_back({"gru_step", nn::grad_check(ps, loss_fn, tolerance)});
  }

  {
    ParamStore ps;
    nn::init_gru_params(ps, "f", in_dim, hidden, rng);
    nn::init_gru_params(ps, "b", in_dim, hidden, rng);
    auto loss_fn = [&](ParamStore& p, bool with_grad) {
      Tape tape;
      std::vector<Tape::Id> ids;
      for (const Tensor2& x : xs) ids.push_back(tape.leaf(x));
      const nn::GruNodes f = nn::gru_param_nodes(tape, p, "f");
      const nn::GruNodes b = nn::gru_param_nodes(tape, p, "b");
      const std::vector<Tape::Id> states = nn::bigru_encode(tape, f, b, ids, hidden);
      const Tape::Id loss = tape.softmax_xent(states[3], 2);
      if (with_grad) tape.backward(loss);
      return tape.value(loss).at(0, 0);
    };
    cases.push_back({"bigru_encode", nn::grad_check(ps, loss_fn, tolerance)});
  }

  {
    ParamStore ps;
    nn::init_gru_params(ps, "f", in_dim, hidden, rng);
    nn::init_gru_params(ps, "b", in_dim, hidden, rng);
    nn::init_attention_params(ps, "a", 2 * hidden, att, rng);
    auto loss_fn = [&](ParamStore& p, bool with_grad) {
      Tape tape;
      std::vector<Tape::Id> ids;
      for (const Tensor2& x : xs) ids.push_back(tape.leaf(x));
      const nn::GruNodes f = nn::gru_param_nodes(tape, p, "f");
      const nn::GruNodes b = nn::gru_param_nodes(tape, p, "b");
      const std::vector<Tape::Id> states = nn::bigru_encode(tape, f, b, ids, hidden);
      const nn::AttentionNodes a = nn::attention_param_nodes(tape, p, "a");
      const Tape::Id context = nn::self_attention(tape, a, states).context;
      const Tape::Id loss = tape.softmax_xent(context, 0);
      if (with_grad) tape.backward(loss);
      return tape.value(loss).at(0, 0);
    };
    cases.push_back({"self_attention", nn::grad_check(ps, loss_fn, tolerance)});
  }

  {
    ParamStore ps;
    ps.add("w", random_tensor(5, in_dim, rng));
    auto loss_fn = [&](ParamStore& p, bool with_grad) {
      Tape tape;
      const Tape::Id out = nn::dense_relu(tape, tape.param(p, "w"), tape.leaf(xs[1]));
      const Tape::Id loss = tape.softmax_xent(out, 3);
      if (with_grad) tape.backward(loss);
      return tape.value(loss).at(0, 0);
    };
    cases.push_back({"dense_relu", nn::grad_check(ps, loss_fn, tolerance)});
  }

  {
    ParamStore ps;
    ps.add("logits", random_tensor(1, 5, rng));
    auto loss_fn = [&](ParamStore& p, bool with_grad) {
      Tape tape;
      const Tape::Id loss = tape.softmax_xent(tape.param(p, "logits"), 2);
      if (with_grad) tape.backward(loss);
      return tape.value(loss).at(0, 0);
    };
    cases.push_back({"softmax_xent", nn::grad_check(ps, loss_fn, tolerance)});
  }

  for (Architecture arch : {Architecture::conatt, Architecture::crnn}) {
    ModelConfig config;
    config.arch = arch;
    config.vocab_size = 10;
    config.num_classes = 3;
    config.embedding_dim = 4;
    config.hidden_size = 6;
    config.attention_dim = 5;
    config.rep_dim = 6;
    RfsModel model(config, 77);
    ModelInput input;
    input.pre_context = {1, 4, 2};
    input.target = 7;
    input.pos_context = {3, 9};
    auto loss_fn = [&](ParamStore&, bool with_grad) {
      Tape tape;
      const RfsModel::Forward f = model.forward(tape, input, 1);
      if (with_grad) tape.backward(f.loss);
      return tape.value(f.loss).at(0, 0);
    };
    cases.push_back({to_string(arch), nn::grad_check(model.params(), loss_fn, tolerance)});
  }

  return cases;
}

}  // namespace refsel
