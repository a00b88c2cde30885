#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "botdna/graph.hpp"
#include "botdna/tensor.hpp"

// Differentiable operations. Every op validates shapes, records its output on
// the input's graph and registers the matching backward rule.
namespace botdna::ops {

// Lifts a parameter into the graph; gradients flow into param.grad.
Var leaf(Graph& g, Parameter& param);

// y = x W + b over the last dimension. W is [in,out], b is [out].
Var dense(Var x, Parameter& w, Parameter& b);

Var tanh(Var x);
Var sigmoid(Var x);
Var relu(Var x);
Var softmax_lastdim(Var x);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var x, double s);
// z * a + (1 - z) * b, elementwise.
Var blend(Var z, Var a, Var b);

Var concat_lastdim(Var a, Var b);
Var concat_rows(Var a, Var b);
// Row i of a rank-2 tensor as a rank-1 tensor.
Var row(Var x, std::size_t i);
Var reshape(Var x, Shape shape);
// Column means of x[n,d].
Var global_average_pool(Var x);
Var sum(Var x);
// Scalar <x, w> against a constant tensor of the same size.
Var dot(Var x, const Tensor& w);

// softmax(Q K^T / sqrt(d)) V for Q[n,d], K[m,d], V[m,d].
Var scaled_dot_attention(Var q, Var k, Var v);

// Mean over the batch of w_y * -log softmax(logits)[y]; logits are [batch,2].
Var weighted_cross_entropy(Var logits, const std::vector<int>& labels,
                           std::array<double, 2> class_weights);

struct GmuParams {
  Parameter* w_t;
  Parameter* b_t;
  Parameter* w_v;
  Parameter* b_v;
  Parameter* w_z;
  Parameter* b_z;
};

struct GmuOutput {
  Var h;
  Var gate;
  Var h_text;
  Var h_vision;
};

// Gated multimodal unit over rank-1 features f_t and f_v.
GmuOutput gmu(Var f_t, Var f_v, const GmuParams& params);

// 3x3 convolution, stride 1, zero padding 1. x is [cin,h,w], W is
// [cout, cin*9], b is [cout].
Var conv3x3(Var x, Parameter& w, Parameter& b);
// 2x2 max pooling with stride 2 over [c,h,w]; odd edges are dropped.
Var max_pool2(Var x);
// [c,h,w] -> [h*w, c].
Var channels_to_rows(Var x);

// Sequence of token embeddings: row 0 is `start`, row i+1 is the sum of the
// table rows listed in buckets[i].
Var embed_tokens(Graph& g, Parameter& start, Parameter& table,
                 const std::vector<std::vector<std::uint32_t>>& buckets);

}  // namespace botdna::ops
