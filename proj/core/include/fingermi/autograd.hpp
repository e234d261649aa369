#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fingermi/tensor.hpp"

namespace fingermi {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Backward rule of a recorded node. Receives the gradient of the loss with
/// respect to the node's output and accumulates into its inputs' buffers
/// through Tape::grad_of.
using BackwardFn = std::function<void(Tape& tape, std::span<const double> out_grad)>;

/// Append-only record of primitive applications. Nodes are stored in creation
/// order, which is a topological order of the computation.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Value that never receives a gradient.
  Var constant(Tensor value);

  /// Leaf bound to an external tensor. When `target.requires_grad()` is set,
  /// backprop adds d(loss)/d(target) into `target.grad()`. The target must
  /// outlive backprop.
  Var leaf(Tensor& target);

  /// Records a primitive. `value` must be finite; `backward` is only invoked
  /// when at least one input needs a gradient.
  Var record(std::string op, Tensor value, std::vector<Var> inputs, BackwardFn backward);

  const Tensor& value(Var v) const { return nodes_[v.id_].value; }
  bool needs_grad(Var v) const { return nodes_[v.id_].needs_grad; }

  /// Gradient accumulator for `v`, allocated on first access during backprop.
  std::span<double> grad_of(Var v);

  /// Reverse sweep from a scalar loss. Leaf targets receive gradients additively.
  void backprop(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    std::string op;
    Tensor value;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    Tensor* target = nullptr;
    bool needs_grad = false;
    std::vector<double> grad;
  };

  Var push(Node node);

  std::deque<Node> nodes_;
};

inline const Tensor& Var::value() const { return tape_->value(*this); }

}  // namespace fingermi
