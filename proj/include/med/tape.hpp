#pragma once

#include <functional>
#include <unordered_map>
#include <vector>

#include "med/tensor.hpp"

namespace med::nn {

// Reverse-mode differentiation over a Wengert list of Tensor operations.
// A tape records one forward computation; backward() then accumulates exact
// gradients of a scalar root into every node, including parameter leaves.
// Leaves reference their parameter tensor (one node per distinct tensor, so
// reuse accumulates into a single gradient).
class Tape {
 public:
  using Id = std::size_t;

  // Parameter leaf. `param` must outlive the tape.
  Id leaf(const Tensor& param);
  // Non-differentiable value.
  Id constant(Tensor value);

  const Tensor& value(Id id) const {
    const Node& n = nodes_[id];
    return n.ref ? *n.ref : n.value;
  }
  const Tensor& grad(Id id) const { return nodes_[id].grad; }

  Id row(Id matrix, std::size_t r);          // embedding lookup
  Id matvec(Id m, Id x);
  Id add(Id a, Id b);
  Id mul(Id a, Id b);                        // elementwise
  Id lerp(Id gate, Id a, Id b);              // (1-gate)*a + gate*b
  Id sigmoid(Id a);
  Id tanh(Id a);
  Id concat(const std::vector<Id>& parts);
  Id dot(Id a, Id b);                        // rank-1 x rank-1 -> scalar
  Id max_elem(Id a, Id b);                   // elementwise max (ties go left)
  Id scale(Id a, double s);
  Id sum(const std::vector<Id>& scalars);

  // Softmax over scalar energies and the weighted sum of the annotations in
  // one fused node. Softmax weights are written to *weights_out if given.
  Id attend(const std::vector<Id>& energies, const std::vector<Id>& annotations,
            Tensor* weights_out = nullptr);

  // Numerically stable softmax + negative log-likelihood of `gold`.
  // Probabilities are written to *probs_out if given.
  Id softmax_xent(Id logits, std::size_t gold, Tensor* probs_out = nullptr);

  // Accumulates d(root)/d(node) into every node's grad. root must be scalar.
  // One backward pass per tape.
  void backward(Id root);

  // Gradient of a parameter leaf, or null if the tensor never entered the tape.
  const Tensor* grad_of(const Tensor& param) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    const Tensor* ref = nullptr;
    Tensor value;
    Tensor grad;
    std::function<void(Tape&)> back;
  };

  Id push(Tensor value, std::function<void(Tape&)> back);
  Tensor& grad_mut(Id id) { return nodes_[id].grad; }

  std::vector<Node> nodes_;
  std::unordered_map<const Tensor*, Id> leaves_;
  bool backward_done_ = false;
};

}  // namespace med::nn
