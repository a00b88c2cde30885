#include "botdna/graph.hpp"

#include "botdna/error.hpp"

namespace botdna {

const Tensor& Var::value() const { return graph->value(*this); }

Var Graph::input(Tensor value) {
  if (!value.all_finite()) throw NumericError("non-finite value fed as graph input");
  nodes_.push_back(Node{std::move(value), {}, false, "input", nullptr});
  return Var{this, nodes_.size() - 1};
}

Var Graph::record(Tensor value, std::string op, BackwardFn backward) {
  if (!value.all_finite()) {
    throw NumericError("non-finite value produced by " + op + " (node " +
                       std::to_string(nodes_.size()) + ")");
  }
  nodes_.push_back(Node{std::move(value), {}, false, std::move(op), std::move(backward)});
  return Var{this, nodes_.size() - 1};
}

Tensor& Graph::grad(Var v) {
  Node& node = nodes_.at(v.id);
  if (!node.has_grad) {
    node.grad = Tensor(node.value.shape());
    node.has_grad = true;
  }
  return node.grad;
}

void Graph::backward(Var root) {
  if (backward_done_) throw Error("backward already ran on this graph");
  if (value(root).size() != 1) {
    throw ShapeError("backward root must hold one value, got shape " +
                     shape_string(value(root).shape()));
  }
  backward_done_ = true;
  grad(root)[0] = 1.0;
  for (std::size_t i = root.id + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.has_grad || !node.backward) continue;
    if (!node.grad.all_finite()) {
      throw NumericError("non-finite gradient reached " + node.op + " (node " +
                         std::to_string(i) + ")");
    }
    node.backward(*this, node.grad);
  }
}

}  // namespace botdna
