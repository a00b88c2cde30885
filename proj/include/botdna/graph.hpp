#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "botdna/tensor.hpp"

namespace botdna {

class Graph;

// Handle to a node of a Graph.
struct Var {
  Graph* graph = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
};

// Tape for reverse-mode differentiation. Nodes are appended in evaluation
// order, which is a topological order, so backward walks the tape once from
// the root towards the front. One graph per sample, one thread per graph.
class Graph {
 public:
  // Receives the graph and the gradient flowing into the node's output.
  using BackwardFn = std::function<void(Graph&, const Tensor&)>;

  Var input(Tensor value);
  Var record(Tensor value, std::string op, BackwardFn backward);

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  const std::string& op(Var v) const { return nodes_.at(v.id).op; }
  // Gradient buffer for a node, allocated as zeros on first access.
  Tensor& grad(Var v);
  bool has_grad(Var v) const { return nodes_.at(v.id).has_grad; }

  // Seeds d(root)/d(root) = 1 for a single-element root and propagates.
  // Parameter gradients accumulate into Parameter::grad.
  void backward(Var root);

  std::size_t size() const { return nodes_.size(); }
  Var var(std::size_t id) { return Var{this, id}; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool has_grad = false;
    std::string op;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace botdna
