#pragma once

#include "hyperrnn/numerics/types.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

// Reverse-mode automatic differentiation over dense matrices.
//
// A graph is built eagerly by calling the ops below; each op stores its
// value and a closure that scatters the output gradient into its parents.
// Recurrences are unrolled by threading state Vars through repeated calls,
// so backward() on a loss summed over slots is backpropagation through time.
// Graphs are single-threaded; node values are never mutated once built.

namespace hyperrnn::ad {

class Node;
using Var = std::shared_ptr<Node>;

class Node {
 public:
  using BackwardFn = std::function<void(const Node& self)>;

  Node(Matrix value, std::vector<Var> parents, BackwardFn backward, bool requires_grad);
  /// Releases long parent chains iteratively.
  ~Node();
  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;

  const Matrix& value() const { return value_; }
  Eigen::Index rows() const { return value_.rows(); }
  Eigen::Index cols() const { return value_.cols(); }

  /// Accumulated gradient; zeros if nothing reached this node.
  const Matrix& grad() const;
  /// Mutable gradient buffer, zero-initialised on first use.
  Matrix& grad_buffer() const;
  bool has_grad() const { return has_grad_; }

  bool requires_grad() const { return requires_grad_; }
  const std::vector<Var>& parents() const { return parents_; }

  const std::string& label() const { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }

 private:
  friend void backward(const Var& loss);

  Matrix value_;
  mutable Matrix grad_;
  mutable bool has_grad_ = false;
  std::vector<Var> parents_;
  BackwardFn backward_;
  bool requires_grad_;
  std::string label_;
};

/// Leaf with no gradient.
Var constant(Matrix value, std::string label = {});
/// Leaf whose gradient is collected by backward().
Var parameter(Matrix value, std::string label = {});

/// Generic op constructor. `fn` receives the finished node and must add into
/// grad_buffer() of every parent that requires_grad(). Parents are dropped
/// when none of them needs a gradient.
Var make_op(Matrix value, std::vector<Var> parents, Node::BackwardFn fn);

Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
/// Elementwise product.
Var mul(const Var& a, const Var& b);
/// x + bias, bias (rows x 1) broadcast across columns.
Var add_bias(const Var& x, const Var& bias);
Var scale(const Var& a, double s);
Var relu(const Var& a);
Var tanh(const Var& a);
Var hardtanh(const Var& a);
/// Forward sign(u) with sign(0) = +1; backward passes grad where |u| <= 1.
Var sign_ste(const Var& a);
/// Rows [begin, begin + count).
Var rows(const Var& a, Eigen::Index begin, Eigen::Index count);
/// Sum of all entries, as a 1x1 node.
Var sum(const Var& a);
/// Sum of squared entries, as a 1x1 node.
Var sum_squares(const Var& a);

/// Fills gradients of every node that requires one. `loss` must be 1x1.
void backward(const Var& loss);

}  // namespace hyperrnn::ad
