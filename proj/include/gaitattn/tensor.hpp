#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "gaitattn/errors.hpp"

namespace gaitattn {

class Tensor;

namespace detail {

// One node of the recorded computation. Leaf nodes have no parents; op nodes
// carry a backward closure that reads this node's grad and accumulates into
// the parents' grads (additively, so a tensor feeding k consumers ends up
// with the sum of k contributions).
struct Node {
  std::vector<int> shape;
  std::vector<double> data;
  std::vector<double> grad;  // sized like data iff requires_grad
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  std::size_t numel() const { return data.size(); }
  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
  }
};

// Reverse topological sweep over the graph reachable from a root. Built once
// per backward() call; visits every reachable node exactly once.
class Graph {
 public:
  static Graph build(const std::shared_ptr<Node>& root);
  // Nodes in topological order (parents before children).
  const std::vector<Node*>& order() const { return order_; }
  void run_backward();

 private:
  std::vector<Node*> order_;
};

std::shared_ptr<Node> node_of(const Tensor& t);
Tensor wrap(std::shared_ptr<Node> n);

}  // namespace detail

// Dense row-major 64-bit float array with an optional gradient slot. Copying
// a Tensor copies the handle, not the storage; use clone() for a deep copy.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor full(std::vector<int> shape, double value, bool requires_grad = false);
  static Tensor from_data(std::vector<int> shape, std::vector<double> data,
                          bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const std::vector<int>& shape() const { return check().shape; }
  int ndim() const { return static_cast<int>(check().shape.size()); }
  int dim(int i) const { return check().shape.at(static_cast<std::size_t>(i)); }
  int numel() const { return static_cast<int>(check().data.size()); }

  double* data() { return check().data.data(); }
  const double* data() const { return check().data.data(); }
  std::vector<double>& data_vec() { return check().data; }
  const std::vector<double>& data_vec() const { return check().data; }

  bool requires_grad() const { return check().requires_grad; }
  // Gradient buffer; throws unless requires_grad.
  std::vector<double>& grad_vec();
  const std::vector<double>& grad_vec() const;
  void zero_grad();

  double item() const;      // value of a one-element tensor
  Tensor clone() const;     // deep copy (detached, keeps requires_grad)
  Tensor detach() const;    // shares nothing with the graph, keeps values
  bool all_finite() const;

  // Reverse-mode sweep from a scalar. Repeated calls accumulate gradients;
  // callers zero grads between steps.
  void backward() const;

 private:
  explicit Tensor(std::shared_ptr<detail::Node> n) : node_(std::move(n)) {}
  detail::Node& check();
  const detail::Node& check() const;

  std::shared_ptr<detail::Node> node_;

  friend std::shared_ptr<detail::Node> detail::node_of(const Tensor&);
  friend Tensor detail::wrap(std::shared_ptr<detail::Node>);
};

}  // namespace gaitattn
