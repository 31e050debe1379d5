#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "refsel/nn/tensor.hpp"

namespace refsel::nn {

// Reverse-mode autodiff over Tensor2 values. One tape records one forward
// pass; backward() sweeps it once in reverse and flushes parameter
// gradients into their ParamStore accumulators (added, so a batch can
// accumulate across tapes before an optimizer step).
//
// Node ids are indices into the tape; parameter leaves reference the store
// value in place instead of copying it.
class Tape {
 public:
  using Id = int;

  // External value; caller keeps it alive for the tape's lifetime.
  Id leaf(const Tensor2& v);
  // Owned value with no gradient flow.
  Id constant(Tensor2 v);
  // Parameter leaf; gradient flushes into ps.grad(name).
  Id param(ParamStore& ps, const std::string& name);
  // Single row of a parameter matrix; gradient scatters into that row.
  Id embedding_row(ParamStore& ps, const std::string& name, int row);

  Id matmul(Id a, Id b, bool trans_a = false, bool trans_b = false);
  Id add(Id a, Id b);
  Id sub(Id a, Id b);
  Id mul(Id a, Id b);  // elementwise
  Id one_minus(Id a);
  Id scale(Id a, double s);
  Id sigmoid(Id a);
  Id tanh(Id a);
  Id relu(Id a);
  Id concat_cols(std::span<const Id> parts);
  Id stack_rows(std::span<const Id> parts);
  Id softmax_row(Id a);
  // Scalar loss -log p[gold]; stabilized; probabilities kept on the node.
  Id softmax_xent(Id logits, int gold);

  const Tensor2& value(Id id) const;
  // Probabilities of a softmax_xent node.
  const Tensor2& probabilities(Id id) const;

  // Seeds d(loss)=1, sweeps in reverse, flushes parameter gradients.
  // loss must be 1x1. Callable once per tape.
  void backward(Id loss);

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor2 owned;
    const Tensor2* external = nullptr;  // stable storage outside the tape
    Tensor2 aux;                        // softmax_xent probabilities
    std::function<void(Tape&, Id)> backprop;
    ParamStore* sink = nullptr;
    std::string sink_name;
    int sink_row = -1;
  };

  Id push(Node node);
  Id make_owned(Tensor2 value, std::function<void(Tape&, Id)> backprop);
  const Tensor2& val(Id id) const {
    const Node& n = nodes_[id];
    return n.external ? *n.external : n.owned;
  }
  bool touched(Id id) const { return grads_[id].rows != 0; }
  Tensor2& grad_ref(Id id);
  void check_id(Id id) const;

  std::vector<Node> nodes_;
  std::vector<Tensor2> grads_;
  bool backward_done_ = false;
};

}  // namespace refsel::nn
