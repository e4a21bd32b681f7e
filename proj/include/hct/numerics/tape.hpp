#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <utility>
#include <vector>

#include "hct/numerics/types.hpp"

namespace hct {

template <class Scalar>
class Tape;

/// Handle to a node recorded on a Tape.
template <class Scalar>
struct Var {
  Tape<Scalar>* tape = nullptr;
  int id = -1;

  const Matrix<Scalar>& value() const { return tape->value(*this); }
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
};

template <class Scalar>
using Gradients = std::vector<Matrix<Scalar>>;

/// Reverse-mode differentiation record.
///
/// Nodes are appended in evaluation order, so every node's inputs precede it
/// and a single reverse sweep from the root visits each reachable node once.
/// Nodes that depend on no registered variable carry no backward closure.
template <class Scalar>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Matrix<Scalar>&)>;

  Tape() { nodes_.reserve(256); }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // With checking on, every recorded value must be finite.
  void set_checked(bool checked) { checked_ = checked; }

  Var<Scalar> constant(Matrix<Scalar> value) { return push(std::move(value), {}, false, nullptr); }

  /// Registers a differentiable leaf; its gradient is reported by backward().
  Var<Scalar> variable(Matrix<Scalar> value) {
    Var<Scalar> v = push(std::move(value), {}, true, nullptr);
    variables_.push_back(v.id);
    return v;
  }

  Var<Scalar> record(Matrix<Scalar> value, std::initializer_list<Var<Scalar>> inputs, BackwardFn fn) {
    std::vector<int> ids;
    ids.reserve(inputs.size());
    bool needs_grad = false;
    for (const Var<Scalar>& in : inputs) {
      if (in.tape != this) fail(ErrorKind::contract, "operand recorded on a different tape");
      ids.push_back(in.id);
      needs_grad = needs_grad || nodes_[static_cast<std::size_t>(in.id)].requires_grad;
    }
    return push(std::move(value), std::move(ids), needs_grad, needs_grad ? std::move(fn) : nullptr);
  }

  const Matrix<Scalar>& value(Var<Scalar> v) const { return node(v).value; }
  bool requires_grad(Var<Scalar> v) const { return node(v).requires_grad; }
  const std::vector<int>& inputs_of(Var<Scalar> v) const { return node(v).inputs; }

  template <class Derived>
  void accumulate(Var<Scalar> v, const Eigen::MatrixBase<Derived>& grad) {
    Node& n = node(v);
    if (!n.requires_grad) return;
    if (n.grad.size() == 0) {
      n.grad = grad;
    } else {
      n.grad += grad;
    }
  }

  /// Gradients of a 1x1 root with respect to every registered variable, in
  /// registration order. Variables the root does not depend on get zeros.
  Gradients<Scalar> backward(Var<Scalar> root) {
    if (root.tape != this) fail(ErrorKind::contract, "backward root recorded on a different tape");
    Node& r = node(root);
    if (r.value.size() != 1) {
      fail(ErrorKind::contract, "backward root must be scalar, got " + shape_string(r.value));
    }
    for (Node& n : nodes_) n.grad.resize(0, 0);
    visits_ = 0;
    if (r.requires_grad) r.grad = Matrix<Scalar>::Ones(1, 1);
    for (int id = root.id; id >= 0; --id) {
      Node& n = nodes_[static_cast<std::size_t>(id)];
      if (n.grad.size() == 0) continue;
      ++visits_;
      if (n.backward) {
        // The closure only touches strictly earlier nodes, so this grad stays put.
        const Matrix<Scalar> g = std::move(n.grad);
        n.backward(*this, g);
        n.grad = g;
      }
    }
    Gradients<Scalar> out;
    out.reserve(variables_.size());
    for (int id : variables_) {
      const Node& n = nodes_[static_cast<std::size_t>(id)];
      out.push_back(n.grad.size() == 0 ? Matrix<Scalar>::Zero(n.value.rows(), n.value.cols())
                                       : n.grad);
    }
    return out;
  }

  std::size_t size() const { return nodes_.size(); }
  std::size_t variable_count() const { return variables_.size(); }
  // Number of nodes the last backward() sweep processed.
  std::size_t last_visit_count() const { return visits_; }

 private:
  struct Node {
    Matrix<Scalar> value;
    Matrix<Scalar> grad;
    std::vector<int> inputs;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Var<Scalar> push(Matrix<Scalar> value, std::vector<int> inputs, bool requires_grad, BackwardFn fn) {
    if (checked_) require_finite(value, "tape node " + std::to_string(nodes_.size()));
    nodes_.push_back(Node{std::move(value), {}, std::move(inputs), requires_grad, std::move(fn)});
    return Var<Scalar>{this, static_cast<int>(nodes_.size() - 1)};
  }

  Node& node(Var<Scalar> v) { return nodes_.at(static_cast<std::size_t>(v.id)); }
  const Node& node(Var<Scalar> v) const { return nodes_.at(static_cast<std::size_t>(v.id)); }

  std::vector<Node> nodes_;
  std::vector<int> variables_;
  std::size_t visits_ = 0;
  bool checked_ = true;
};

}  // namespace hct
