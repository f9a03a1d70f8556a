#include "hyperrnn/numerics/autodiff.hpp"

#include "hyperrnn/numerics/kernels.hpp"

#include <unordered_set>

namespace hyperrnn::ad {

Node::Node(Matrix value, std::vector<Var> parents, BackwardFn backward, bool requires_grad)
    : value_(std::move(value)),
      parents_(std::move(parents)),
      backward_(std::move(backward)),
      requires_grad_(requires_grad) {}

Node::~Node() {
  std::vector<Var> pending = std::move(parents_);
  while (!pending.empty()) {
    Var p = std::move(pending.back());
    pending.pop_back();
    if (p && p.use_count() == 1) {
      for (auto& q : p->parents_) pending.push_back(std::move(q));
      p->parents_.clear();
    }
  }
}

const Matrix& Node::grad() const { return grad_buffer(); }

Matrix& Node::grad_buffer() const {
  if (!has_grad_) {
    grad_ = Matrix::Zero(value_.rows(), value_.cols());
    has_grad_ = true;
  }
  return grad_;
}

Var constant(Matrix value, std::string label) {
  auto n = std::make_shared<Node>(std::move(value), std::vector<Var>{}, nullptr, false);
  n->set_label(std::move(label));
  return n;
}

Var parameter(Matrix value, std::string label) {
  auto n = std::make_shared<Node>(std::move(value), std::vector<Var>{}, nullptr, true);
  n->set_label(std::move(label));
  return n;
}

Var make_op(Matrix value, std::vector<Var> parents, Node::BackwardFn fn) {
  bool needs = false;
  for (const auto& p : parents) needs = needs || p->requires_grad();
  if (!needs) return std::make_shared<Node>(std::move(value), std::vector<Var>{}, nullptr, false);
  return std::make_shared<Node>(std::move(value), std::move(parents), std::move(fn), true);
}

namespace {

void require_same_shape(const Var& a, const Var& b, const char* op) {
  require_dims(a->rows() == b->rows() && a->cols() == b->cols(),
               std::string(op) + ": operand shapes differ");
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  require_dims(a->cols() == b->rows(), "matmul: inner dimensions differ");
  return make_op(kernels::matmul(a->value(), b->value()), {a, b}, [](const Node& self) {
    const auto& pa = self.parents()[0];
    const auto& pb = self.parents()[1];
    if (pa->requires_grad()) kernels::matmul_acc_nt(self.grad(), pb->value(), pa->grad_buffer());
    if (pb->requires_grad()) kernels::matmul_acc_tn(pa->value(), self.grad(), pb->grad_buffer());
  });
}

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  return make_op(a->value() + b->value(), {a, b}, [](const Node& self) {
    for (const auto& p : self.parents())
      if (p->requires_grad()) p->grad_buffer() += self.grad();
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  return make_op(a->value() - b->value(), {a, b}, [](const Node& self) {
    const auto& pa = self.parents()[0];
    const auto& pb = self.parents()[1];
    if (pa->requires_grad()) pa->grad_buffer() += self.grad();
    if (pb->requires_grad()) pb->grad_buffer() -= self.grad();
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a, b, "mul");
  return make_op(kernels::hadamard(a->value(), b->value()), {a, b}, [](const Node& self) {
    const auto& pa = self.parents()[0];
    const auto& pb = self.parents()[1];
    if (pa->requires_grad()) pa->grad_buffer() += kernels::hadamard(self.grad(), pb->value());
    if (pb->requires_grad()) pb->grad_buffer() += kernels::hadamard(self.grad(), pa->value());
  });
}

Var add_bias(const Var& x, const Var& bias) {
  return make_op(kernels::add_bias(x->value(), bias->value()), {x, bias}, [](const Node& self) {
    const auto& px = self.parents()[0];
    const auto& pb = self.parents()[1];
    if (px->requires_grad()) px->grad_buffer() += self.grad();
    if (pb->requires_grad()) kernels::bias_grad_acc(self.grad(), pb->grad_buffer());
  });
}

Var scale(const Var& a, double s) {
  return make_op(a->value() * s, {a}, [s](const Node& self) {
    self.parents()[0]->grad_buffer() += s * self.grad();
  });
}

Var relu(const Var& a) {
  return make_op(kernels::relu(a->value()), {a}, [](const Node& self) {
    const auto& p = self.parents()[0];
    kernels::relu_backward_acc(p->value(), self.grad(), p->grad_buffer());
  });
}

Var tanh(const Var& a) {
  Matrix y = a->value().array().tanh().matrix();
  return make_op(std::move(y), {a}, [](const Node& self) {
    self.parents()[0]->grad_buffer().array() +=
        self.grad().array() * (1.0 - self.value().array().square());
  });
}

Var hardtanh(const Var& a) {
  return make_op(a->value().cwiseMax(-1.0).cwiseMin(1.0), {a}, [](const Node& self) {
    const auto& p = self.parents()[0];
    p->grad_buffer().array() += (p->value().array().abs() <= 1.0).select(self.grad().array(), 0.0);
  });
}

Var sign_ste(const Var& a) {
  Matrix y = (a->value().array() >= 0.0).select(Matrix::Ones(a->rows(), a->cols()), -1.0);
  return make_op(std::move(y), {a}, [](const Node& self) {
    const auto& p = self.parents()[0];
    p->grad_buffer().array() += (p->value().array().abs() <= 1.0).select(self.grad().array(), 0.0);
  });
}

Var rows(const Var& a, Eigen::Index begin, Eigen::Index count) {
  if (begin < 0 || count < 0 || begin + count > a->rows())
    throw IndexError("rows: slice out of range");
  return make_op(a->value().middleRows(begin, count), {a}, [begin, count](const Node& self) {
    self.parents()[0]->grad_buffer().middleRows(begin, count) += self.grad();
  });
}

Var sum(const Var& a) {
  Matrix s(1, 1);
  s(0, 0) = a->value().sum();
  return make_op(std::move(s), {a}, [](const Node& self) {
    self.parents()[0]->grad_buffer().array() += self.grad()(0, 0);
  });
}

Var sum_squares(const Var& a) {
  Matrix s(1, 1);
  s(0, 0) = a->value().squaredNorm();
  return make_op(std::move(s), {a}, [](const Node& self) {
    const auto& p = self.parents()[0];
    p->grad_buffer() += (2.0 * self.grad()(0, 0)) * p->value();
  });
}

void backward(const Var& loss) {
  if (loss->rows() != 1 || loss->cols() != 1)
    throw ContractError("backward: loss must be a scalar (1x1) node");
  if (!loss->requires_grad()) return;

  // Iterative post-order DFS; deep unrolled recurrences would otherwise
  // recurse once per node.
  std::vector<const Node*> order;
  std::unordered_set<const Node*> visited;
  std::vector<std::pair<const Node*, std::size_t>> stack{{loss.get(), 0}};
  visited.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents().size()) {
      const Node* parent = node->parents()[next++].get();
      if (parent->requires_grad() && visited.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss->grad_buffer().setOnes();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const Node* node = *it;
    if (node->backward_ && node->has_grad()) node->backward_(*node);
  }
}

}  // namespace hyperrnn::ad
