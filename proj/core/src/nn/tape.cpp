#include "refsel/nn/tape.hpp"

#include <algorithm>
#include <cmath>

#include "refsel/errors.hpp"

namespace refsel::nn {

Tape::Id Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  grads_.emplace_back();
  return static_cast<Id>(nodes_.size()) - 1;
}

Tape::Id Tape::make_owned(Tensor2 value, std::function<void(Tape&, Id)> backprop) {
  Node n;
  n.owned = std::move(value);
  n.backprop = std::move(backprop);
  return push(std::move(n));
}

void Tape::check_id(Id id) const {
  if (id < 0 || id >= static_cast<Id>(nodes_.size()))
    throw ValidationError("tape: invalid node id");
}

Tensor2& Tape::grad_ref(Id id) {
  Tensor2& g = grads_[id];
  if (g.rows == 0) g = Tensor2::zeros(val(id).rows, val(id).cols);
  return g;
}

Tape::Id Tape::leaf(const Tensor2& v) {
  Node n;
  n.external = &v;
  return push(std::move(n));
}

Tape::Id Tape::constant(Tensor2 v) {
  Node n;
  n.owned = std::move(v);
  return push(std::move(n));
}

Tape::Id Tape::param(ParamStore& ps, const std::string& name) {
  Node n;
  n.external = &ps.value(name);
  n.sink = &ps;
  n.sink_name = name;
  return push(std::move(n));
}

Tape::Id Tape::embedding_row(ParamStore& ps, const std::string& name, int row) {
  const Tensor2& table = ps.value(name);
  if (row < 0 || row >= table.rows) throw ValidationError("embedding row out of range");
  Tensor2 v(1, table.cols);
  std::copy(table.row_ptr(row), table.row_ptr(row) + table.cols, v.data.begin());
  Node n;
  n.owned = std::move(v);
  n.sink = &ps;
  n.sink_name = name;
  n.sink_row = row;
  return push(std::move(n));
}

Tape::Id Tape::matmul(Id a, Id b, bool trans_a, bool trans_b) {
  check_id(a);
  check_id(b);
  const Tensor2& va = val(a);
  const Tensor2& vb = val(b);
  const int m = trans_a ? va.cols : va.rows;
  const int n = trans_b ? vb.rows : vb.cols;
  Tensor2 out(m, n);
  gemm_acc(out, va, vb, trans_a, trans_b);
  return make_owned(std::move(out), [a, b, trans_a, trans_b](Tape& t, Id self) {
    const Tensor2& g = t.grads_[self];
    if (trans_a)
      gemm_acc(t.grad_ref(a), t.val(b), g, trans_b, true);
    else
      gemm_acc(t.grad_ref(a), g, t.val(b), false, !trans_b);
    if (trans_b)
      gemm_acc(t.grad_ref(b), g, t.val(a), true, trans_a);
    else
      gemm_acc(t.grad_ref(b), t.val(a), g, !trans_a, false);
  });
}

Tape::Id Tape::add(Id a, Id b) {
  check_id(a);
  check_id(b);
  const Tensor2& va = val(a);
  const Tensor2& vb = val(b);
  if (!va.same_shape(vb)) throw ValidationError("add: shape mismatch");
  Tensor2 out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += vb.data[i];
  return make_owned(std::move(out), [a, b](Tape& t, Id self) {
    const Tensor2& g = t.grads_[self];
    Tensor2& ga = t.grad_ref(a);
    Tensor2& gb = t.grad_ref(b);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga.data[i] += g.data[i];
      gb.data[i] += g.data[i];
    }
  });
}

Tape::Id Tape::sub(Id a, Id b) {
  check_id(a);
  check_id(b);
  const Tensor2& va = val(a);
  const Tensor2& vb = val(b);
  if (!va.same_shape(vb)) throw ValidationError("sub: shape mismatch");
  Tensor2 out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= vb.data[i];
  return make_owned(std::move(out), [a, b](Tape& t, Id self) {
    const Tensor2& g = t.grads_[self];
    Tensor2& ga = t.grad_ref(a);
    Tensor2& gb = t.grad_ref(b);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga.data[i] += g.data[i];
      gb.data[i] -= g.data[i];
    }
  });
}

Tape::Id Tape::mul(Id a, Id b) {
  check_id(a);
  check_id(b);
  const Tensor2& va = val(a);
  const Tensor2& vb = val(b);
  if (!va.same_shape(vb)) throw ValidationError("mul: shape mismatch");
  Tensor2 out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= vb.data[i];
  return make_owned(std::move(out), [a, b](Tape& t, Id self) {
    const Tensor2& g = t.grads_[self];
    const Tensor2& va = t.val(a);
    const Tensor2& vb = t.val(b);
    Tensor2& ga = t.grad_ref(a);
    Tensor2& gb = t.grad_ref(b);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga.data[i] += g.data[i] * vb.data[i];
      gb.data[i] += g.data[i] * va.data[i];
    }
  });
}

Tape::Id Tape::one_minus(Id a) {
  check_id(a);
  Tensor2 out = val(a);
  for (double& v : out.data) v = 1.0 - v;
  return make_owned(std::move(out), [a](Tape& t, Id self) {
    const Tensor2& g = t.grads_[self];
    Tensor2& ga = t.grad_ref(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] -= g.data[i];
  });
}

Tape::Id Tape::scale(Id a, double s) {
  check_id(a);
  Tensor2 out = val(a);
  for (double& v : out.data) v *= s;
  return make_owned(std::move(out), [a, s](Tape& t, Id self) {
    const Tensor2& g = t.grads_[self];
    Tensor2& ga = t.grad_ref(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += s * g.data[i];
  });
}

Tape::Id Tape::sigmoid(Id a) {
  check_id(a);
  Tensor2 out = val(a);
  for (double& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
  return make_owned(std::move(out), [a](Tape& t, Id self) {
    const Tensor2& g = t.grads_[self];
    const Tensor2& y = t.val(self);
    Tensor2& ga = t.grad_ref(a);
    for (std::size_t i = 0; i < g.size(); ++i)
      ga.data[i] += g.data[i] * y.data[i] * (1.0 - y.data[i]);
  });
}

Tape::Id Tape::tanh(Id a) {
  check_id(a);
  Tensor2 out = val(a);
  for (double& v : out.data) v = std::tanh(v);
  return make_owned(std::move(out), [a](Tape& t, Id self) {
    const Tensor2& g = t.grads_[self];
    const Tensor2& y = t.val(self);
    Tensor2& ga = t.grad_ref(a);
    for (std::size_t i = 0; i < g.size(); ++i)
      ga.data[i] += g.data[i] * (1.0 - y.data[i] * y.data[i]);
  });
}

Tape::Id Tape::relu(Id a) {
  check_id(a);
  Tensor2 out = val(a);
  for (double& v : out.data) v = std::max(0.0, v);
  return make_owned(std::move(out), [a](Tape& t, Id self) {
    const Tensor2& g = t.grads_[self];
    const Tensor2& y = t.val(self);
    Tensor2& ga = t.grad_ref(a);
    // subgradient 0 at the kink
    for (std::size_t i = 0; i < g.size(); ++i)
      if (y.data[i] > 0.0) ga.data[i] += g.data[i];
  });
}

Tape::Id Tape::concat_cols(std::span<const Id> parts) {
  if (parts.empty()) throw ValidationError("concat_cols: empty input");
  const int rows = val(parts[0]).rows;
  int cols = 0;
  for (Id p : parts) {
    check_id(p);
    if (val(p).rows != rows) throw ValidationError("concat_cols: row mismatch");
    cols += val(p).cols;
  }
  Tensor2 out(rows, cols);
  int offset = 0;
  for (Id p : parts) {
    const Tensor2& v = val(p);
    for (int r = 0; r < rows; ++r)
      std::copy(v.row_ptr(r), v.row_ptr(r) + v.cols, out.row_ptr(r) + offset);
    offset += v.cols;
  }
  std::vector<Id> ps(parts.begin(), parts.end());
  return make_owned(std::move(out), [ps](Tape& t, Id self) {
    const Tensor2& g = t.grads_[self];
    int offset = 0;
    for (Id p : ps) {
      Tensor2& gp = t.grad_ref(p);
      for (int r = 0; r < gp.rows; ++r)
        for (int c = 0; c < gp.cols; ++c) gp.at(r, c) += g.at(r, offset + c);
      offset += gp.cols;
    }
  });
}

Tape::Id Tape::stack_rows(std::span<const Id> parts) {
  if (parts.empty()) throw ValidationError("stack_rows: empty input");
  const int cols = val(parts[0]).cols;
  int rows = 0;
  for (Id p : parts) {
    check_id(p);
    if (val(p).cols != cols) throw ValidationError("stack_rows: column mismatch");
    rows += val(p).rows;
  }
  Tensor2 out(rows, cols);
  int offset = 0;
  for (Id p : parts) {
    const Tensor2& v = val(p);
    std::copy(v.data.begin(), v.data.end(), out.row_ptr(offset));
    offset += v.rows;
  }
  std::vector<Id> ps(parts.begin(), parts.end());
  return make_owned(std::move(out), [ps](Tape& t, Id self) {
    const Tensor2& g = t.grads_[self];
    std::size_t offset = 0;
    for (Id p : ps) {
      Tensor2& gp = t.grad_ref(p);
      for (std::size_t i = 0; i < gp.size(); ++i) gp.data[i] += g.data[offset + i];
      offset += gp.size();
    }
  });
}

Tape::Id Tape::softmax_row(Id a) {
  check_id(a);
  const Tensor2& v = val(a);
  if (v.rows != 1) throw ValidationError("softmax_row: expected a row vector");
  Tensor2 out = v;
  const double hi = *std::max_element(out.data.begin(), out.data.end());
  double sum = 0.0;
  for (double& x : out.data) {
    x = std::exp(x - hi);
    sum += x;
  }
  for (double& x : out.data) x /= sum;
  return make_owned(std::move(out), [a](Tape& t, Id self) {
    const Tensor2& g = t.grads_[self];
    const Tensor2& y = t.val(self);
    Tensor2& ga = t.grad_ref(a);
    double dot = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) dot += g.data[i] * y.data[i];
    for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += y.data[i] * (g.data[i] - dot);
  });
}

Tape::Id Tape::softmax_xent(Id logits, int gold) {
  check_id(logits);
  const Tensor2& v = val(logits);
  if (v.rows != 1 || v.cols < 2) throw ValidationError("softmax_xent: need a 1xK row, K >= 2");
  if (gold < 0 || gold >= v.cols) throw ValidationError("softmax_xent: gold class out of range");
  Tensor2 probs = v;
  const double hi = *std::max_element(probs.data.begin(), probs.data.end());
  double sum = 0.0;
  for (double& x : probs.data) {
    x = std::exp(x - hi);
    sum += x;
  }
  for (double& x : probs.data) x /= sum;
  Tensor2 loss(1, 1);
  loss.at(0, 0) = -std::log(probs.data[gold]);
  Node n;
  n.owned = std::move(loss);
  n.aux = std::move(probs);
  n.backprop = [logits, gold](Tape& t, Id self) {
    const double g = t.grads_[self].at(0, 0);
    const Tensor2& p = t.nodes_[self].aux;
    Tensor2& gl = t.grad_ref(logits);
    for (int k = 0; k < p.cols; ++k)
      gl.data[k] += g * (p.data[k] - (k == gold ? 1.0 : 0.0));
  };
  return push(std::move(n));
}

const Tensor2& Tape::value(Id id) const {
  check_id(id);
  return val(id);
}

const Tensor2& Tape::probabilities(Id id) const {
  check_id(id);
  if (nodes_[id].aux.rows == 0) throw ValidationError("tape: node carries no probabilities");
  return nodes_[id].aux;
}

void Tape::backward(Id loss) {
  check_id(loss);
  if (backward_done_) throw ValidationError("tape: backward already run");
  const Tensor2& lv = val(loss);
  if (lv.rows != 1 || lv.cols != 1) throw ValidationError("tape: loss must be scalar");
  backward_done_ = true;
  grad_ref(loss).at(0, 0) = 1.0;
  for (Id id = static_cast<Id>(nodes_.size()) - 1; id >= 0; --id) {
    if (!touched(id) || !nodes_[id].backprop) continue;
    nodes_[id].backprop(*this, id);
  }
  // flush parameter gradients
  for (Id id = 0; id < static_cast<Id>(nodes_.size()); ++id) {
    Node& n = nodes_[id];
    if (!n.sink || !touched(id)) continue;
    Tensor2& dst = n.sink->grad(n.sink_name);
    const Tensor2& src = grads_[id];
    if (n.sink_row >= 0) {
      double* row = dst.row_ptr(n.sink_row);
      for (int c = 0; c < src.cols; ++c) row[c] += src.data[c];
    } else {
      for (std::size_t i = 0; i < src.size(); ++i) dst.data[i] += src.data[i];
    }
  }
}

}  // namespace refsel::nn
