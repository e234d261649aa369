#include "fingermi/autograd.hpp"

#include <algorithm>

namespace fingermi {

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  Node node;
  node.op = "constant";
  node.value = std::move(value);
  return push(std::move(node));
}

Var Tape::leaf(Tensor& target) {
  Node node;
  node.op = "leaf";
  node.value = target;
  node.value.clear_grad();
  node.target = &target;
  node.needs_grad = target.requires_grad();
  return push(std::move(node));
}

Var Tape::record(std::string op, Tensor value, std::vector<Var> inputs, BackwardFn backward) {
  if (!value.all_finite()) {
    throw NumericError("non-finite value produced by " + op);
  }
  Node node;
  node.op = std::move(op);
  node.value = std::move(value);
  node.backward = std::move(backward);
  for (const Var& in : inputs) {
    if (in.tape_ != this) throw ValueError(node.op + ": input recorded on a different tape");
    node.inputs.push_back(in.id_);
    node.needs_grad = node.needs_grad || nodes_[in.id_].needs_grad;
  }
  return push(std::move(node));
}

std::span<double> Tape::grad_of(Var v) {
  Node& node = nodes_[v.id_];
  if (node.grad.empty()) node.grad.assign(node.value.size(), 0.0);
  return node.grad;
}

void Tape::backprop(Var loss) {
  if (loss.tape_ != this) throw ValueError("backprop: loss belongs to a different tape");
  if (value(loss).size() != 1) {
    throw ShapeError("backprop requires a scalar loss, got shape " +
                     shape_string(value(loss).shape()));
  }
  for (std::size_t i = 0; i <= loss.id_; ++i) nodes_[i].grad.clear();
  nodes_[loss.id_].grad.assign(1, 1.0);

  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.needs_grad || node.grad.empty()) continue;
    if (node.target != nullptr) {
      Tensor& target = *node.target;
      if (!target.has_grad()) target.zero_grad();
      auto dst = target.grad();
      if (dst.size() != node.grad.size()) {
        throw ShapeError("leaf target changed shape before backprop");
      }
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += node.grad[k];
    } else if (node.backward) {
      // The rule may touch other nodes' grad buffers; keep ours alive in a local.
      std::vector<double> out_grad = std::move(node.grad);
      node.backward(*this, out_grad);
      node.grad = std::move(out_grad);
    }
  }
}

}  // namespace fingermi
