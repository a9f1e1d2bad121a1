#include "gaitattn/tensor.hpp"

#include <cmath>
#include <unordered_set>

namespace gaitattn {

namespace {

std::size_t checked_numel(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw ShapeError("tensor dimensions must be positive");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

}  // namespace

namespace detail {

std::shared_ptr<Node> node_of(const Tensor& t) { return t.node_; }

Tensor wrap(std::shared_ptr<Node> n) { return Tensor(std::move(n)); }

Graph Graph::build(const std::shared_ptr<Node>& root) {
  Graph g;
  // Iterative post-order DFS over parents: a node is appended only after all
  // of its parents, which yields a topological order.
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root.get(), 0);
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next_parent] = stack.back();
    if (next_parent < node->parents.size()) {
      Node* p = node->parents[next_parent++].get();
      if (visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      g.order_.push_back(node);
      stack.pop_back();
    }
  }
  return g;
}

void Graph::run_backward() {
  for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn) n->backward_fn(*n);
  }
}

}  // namespace detail

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(std::vector<int> shape, double value, bool requires_grad) {
  auto n = std::make_shared<detail::Node>();
  std::size_t count = checked_numel(shape);
  n->shape = std::move(shape);
  n->data.assign(count, value);
  n->requires_grad = requires_grad;
  if (requires_grad) n->ensure_grad();
  return Tensor(std::move(n));
}

Tensor Tensor::from_data(std::vector<int> shape, std::vector<double> data,
                         bool requires_grad) {
  if (checked_numel(shape) != data.size())
    throw ShapeError("data length does not match product of shape");
  auto n = std::make_shared<detail::Node>();
  n->shape = std::move(shape);
  n->data = std::move(data);
  n->requires_grad = requires_grad;
  if (requires_grad) n->ensure_grad();
  return Tensor(std::move(n));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from_data({1}, {value}, requires_grad);
}

detail::Node& Tensor::check() {
  if (!node_) throw ContractViolation("operation on an undefined tensor");
  return *node_;
}

const detail::Node& Tensor::check() const {
  if (!node_) throw ContractViolation("operation on an undefined tensor");
  return *node_;
}

std::vector<double>& Tensor::grad_vec() {
  auto& n = check();
  if (!n.requires_grad)
    throw ContractViolation("gradient requested on a tensor without requires_grad");
  n.ensure_grad();
  return n.grad;
}

const std::vector<double>& Tensor::grad_vec() const {
  const auto& n = check();
  if (!n.requires_grad || n.grad.size() != n.data.size())
    throw ContractViolation("gradient requested on a tensor without requires_grad");
  return n.grad;
}

void Tensor::zero_grad() {
  auto& n = check();
  if (n.requires_grad) n.grad.assign(n.data.size(), 0.0);
}

double Tensor::item() const {
  const auto& n = check();
  if (n.data.size() != 1)
    throw ContractViolation("item() requires a one-element tensor");
  return n.data[0];
}

Tensor Tensor::clone() const {
  const auto& n = check();
  return from_data(n.shape, n.data, n.requires_grad);
}

Tensor Tensor::detach() const {
  const auto& n = check();
  return from_data(n.shape, n.data, false);
}

bool Tensor::all_finite() const {
  for (double v : check().data)
    if (!std::isfinite(v)) return false;
  return true;
}

void Tensor::backward() const {
  const auto& n = check();
  if (n.data.size() != 1)
    throw ContractViolation("backward() requires a scalar loss tensor");
  auto graph = detail::Graph::build(node_);
  for (detail::Node* node : graph.order())
    if (node->requires_grad) node->ensure_grad();
  if (node_->requires_grad) node_->grad[0] += 1.0;
  graph.run_backward();
}

}  // namespace gaitattn
