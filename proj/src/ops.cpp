#include "botdna/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "botdna/error.hpp"
#include "botdna/kernels.hpp"

namespace botdna::ops {

namespace {

void require_same_graph(Var a, Var b, const char* op) {
  if (a.graph != b.graph) throw Error(std::string(op) + ": operands live on different graphs");
}

void require_same_shape(Var a, Var b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                     " vs " + shape_string(b.shape()));
  }
}

void require_rank(Var x, std::size_t rank, const char* op) {
  if (x.value().rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) +
                     ", got shape " + shape_string(x.shape()));
  }
}

void accumulate(Tensor& dst, const Tensor& src) {
  double* d = dst.data();
  const double* s = src.data();
  for (std::size_t i = 0; i < dst.size(); ++i) d[i] += s[i];
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Softmax of each row of a [rows, cols] block, in place.
void softmax_rows(double* p, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* v = p + r * cols;
    const double m = *std::max_element(v, v + cols);
    double total = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      v[j] = std::exp(v[j] - m);
      total += v[j];
    }
    for (std::size_t j = 0; j < cols; ++j) v[j] /= total;
  }
}

// dx = s * (dy - <dy, s>) per row.
void softmax_rows_backward(const double* s, const double* dy, double* dx,
                           std::size_t rows, std::size_t cols, double factor) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* sr = s + r * cols;
    const double* gr = dy + r * cols;
    double inner = 0.0;
    for (std::size_t j = 0; j < cols; ++j) inner += gr[j] * sr[j];
    for (std::size_t j = 0; j < cols; ++j) {
      dx[r * cols + j] += factor * sr[j] * (gr[j] - inner);
    }
  }
}

template <typename F, typename D>
Var unary(Var x, const char* name, F forward, D derivative) {
  const Tensor& in = x.value();
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = forward(in[i]);
  const std::size_t xid = x.id;
  return x.graph->record(std::move(out), name,
                         [xid, derivative](Graph& g, const Tensor& dy) {
                           Var xv = g.var(xid);
                           const Tensor& xval = g.value(xv);
                           Tensor& dx = g.grad(xv);
                           for (std::size_t i = 0; i < dx.size(); ++i) {
                             dx[i] += dy[i] * derivative(xval[i]);
                           }
                         });
}

}  // namespace

Var leaf(Graph& g, Parameter& param) {
  Parameter* p = &param;
  return g.record(param.value, "leaf:" + param.name,
                  [p](Graph&, const Tensor& dy) { accumulate(p->grad, dy); });
}

Var dense(Var x, Parameter& w, Parameter& b) {
  const Tensor& in = x.value();
  if (w.value.rank() != 2 || in.rank() == 0 || in.cols() != w.value.dim(0) ||
      b.value.rank() != 1 || b.value.dim(0) != w.value.dim(1)) {
    throw ShapeError("dense: input " + shape_string(in.shape()) + " incompatible with weight " +
                     shape_string(w.value.shape()) + " and bias " +
                     shape_string(b.value.shape()));
  }
  const std::size_t rows = in.rows();
  const std::size_t n_in = w.value.dim(0);
  const std::size_t n_out = w.value.dim(1);
  Shape out_shape = in.shape();
  out_shape.back() = n_out;
  Tensor out(out_shape);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy(b.value.data(), b.value.data() + n_out, out.data() + r * n_out);
  }
  kernels::gemm_nn(rows, n_in, n_out, in.data(), w.value.data(), out.data());

  const std::size_t xid = x.id;
  Parameter* wp = &w;
  Parameter* bp = &b;
  return x.graph->record(
      std::move(out), "dense:" + w.name,
      [xid, wp, bp, rows, n_in, n_out](Graph& g, const Tensor& dy) {
        Var xv = g.var(xid);
        const Tensor& xval = g.value(xv);
        kernels::gemm_tn(rows, n_in, n_out, xval.data(), dy.data(), wp->grad.data());
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t j = 0; j < n_out; ++j) bp->grad[j] += dy[r * n_out + j];
        }
        Tensor& dx = g.grad(xv);
        kernels::gemm_nt(rows, n_out, n_in, dy.data(), wp->value.data(), dx.data());
      });
}

Var tanh(Var x) {
  return unary(
      x, "tanh", [](double v) { return std::tanh(v); },
      [](double v) {
        const double t = std::tanh(v);
        return 1.0 - t * t;
      });
}

Var sigmoid(Var x) {
  return unary(x, "sigmoid", stable_sigmoid, [](double v) {
    const double s = stable_sigmoid(v);
    return s * (1.0 - s);
  });
}

Var relu(Var x) {
  return unary(
      x, "relu", [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v) { return v > 0.0 ? 1.0 : 0.0; });
}

Var softmax_lastdim(Var x) {
  const Tensor& in = x.value();
  if (in.rank() == 0 || in.cols() == 0) {
    throw ShapeError("softmax_lastdim: empty last dimension in " + shape_string(in.shape()));
  }
  Tensor out = in;
  const std::size_t rows = in.rows();
  const std::size_t cols = in.cols();
  softmax_rows(out.data(), rows, cols);
  const std::size_t xid = x.id;
  Graph* graph = x.graph;
  const std::size_t out_id = graph->size();
  return graph->record(std::move(out), "softmax",
                       [xid, out_id, rows, cols](Graph& g, const Tensor& dy) {
                         const Tensor& s = g.value(g.var(out_id));
                         Tensor& dx = g.grad(g.var(xid));
                         softmax_rows_backward(s.data(), dy.data(), dx.data(), rows, cols, 1.0);
                       });
}

Var add(Var a, Var b) {
  require_same_graph(a, b, "add");
  require_same_shape(a, b, "add");
  Tensor out = a.value();
  accumulate(out, b.value());
  const std::size_t aid = a.id, bid = b.id;
  return a.graph->record(std::move(out), "add", [aid, bid](Graph& g, const Tensor& dy) {
    accumulate(g.grad(g.var(aid)), dy);
    accumulate(g.grad(g.var(bid)), dy);
  });
}

Var sub(Var a, Var b) {
  require_same_graph(a, b, "sub");
  require_same_shape(a, b, "sub");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  const std::size_t aid = a.id, bid = b.id;
  return a.graph->record(std::move(out), "sub", [aid, bid](Graph& g, const Tensor& dy) {
    accumulate(g.grad(g.var(aid)), dy);
    Tensor& db = g.grad(g.var(bid));
    for (std::size_t i = 0; i < db.size(); ++i) db[i] -= dy[i];
  });
}

Var mul(Var a, Var b) {
  require_same_graph(a, b, "mul");
  require_same_shape(a, b, "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  const std::size_t aid = a.id, bid = b.id;
  return a.graph->record(std::move(out), "mul", [aid, bid](Graph& g, const Tensor& dy) {
    Var av = g.var(aid), bv = g.var(bid);
    {
      Tensor& da = g.grad(av);
      const Tensor& bval = g.value(bv);
      for (std::size_t i = 0; i < da.size(); ++i) da[i] += dy[i] * bval[i];
    }
    Tensor& db = g.grad(bv);
    const Tensor& aval = g.value(av);
    for (std::size_t i = 0; i < db.size(); ++i) db[i] += dy[i] * aval[i];
  });
}

Var scale(Var x, double s) {
  Tensor out = x.value();
  for (auto& v : out.values()) v *= s;
  const std::size_t xid = x.id;
  return x.graph->record(std::move(out), "scale", [xid, s](Graph& g, const Tensor& dy) {
    Tensor& dx = g.grad(g.var(xid));
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += s * dy[i];
  });
}

Var blend(Var z, Var a, Var b) {
  require_same_graph(z, a, "blend");
  require_same_graph(z, b, "blend");
  require_same_shape(z, a, "blend");
  require_same_shape(z, b, "blend");
  const Tensor& zv = z.value();
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Tensor out(zv.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = zv[i] * av[i] + (1.0 - zv[i]) * bv[i];
  }
  const std::size_t zid = z.id, aid = a.id, bid = b.id;
  return z.graph->record(std::move(out), "blend", [zid, aid, bid](Graph& g, const Tensor& dy) {
    const Tensor& zval = g.value(g.var(zid));
    const Tensor& aval = g.value(g.var(aid));
    const Tensor& bval = g.value(g.var(bid));
    {
      Tensor& dz = g.grad(g.var(zid));
      for (std::size_t i = 0; i < dz.size(); ++i) dz[i] += dy[i] * (aval[i] - bval[i]);
    }
    {
      Tensor& da = g.grad(g.var(aid));
      for (std::size_t i = 0; i < da.size(); ++i) da[i] += dy[i] * zval[i];
    }
    Tensor& db = g.grad(g.var(bid));
    for (std::size_t i = 0; i < db.size(); ++i) db[i] += dy[i] * (1.0 - zval[i]);
  });
}

Var concat_lastdim(Var a, Var b) {
  require_same_graph(a, b, "concat_lastdim");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  bool ok = av.rank() >= 1 && av.rank() == bv.rank();
  for (std::size_t i = 0; ok && i + 1 < av.rank(); ++i) ok = av.dim(i) == bv.dim(i);
  if (!ok) {
    throw ShapeError("concat_lastdim: leading dims differ " + shape_string(av.shape()) +
                     " vs " + shape_string(bv.shape()));
  }
  const std::size_t rows = av.rows();
  const std::size_t ca = av.cols(), cb = bv.cols();
  Shape shape = av.shape();
  shape.back() = ca + cb;
  Tensor out(shape);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy(av.data() + r * ca, av.data() + (r + 1) * ca, out.data() + r * (ca + cb));
    std::copy(bv.data() + r * cb, bv.data() + (r + 1) * cb, out.data() + r * (ca + cb) + ca);
  }
  const std::size_t aid = a.id, bid = b.id;
  return a.graph->record(std::move(out), "concat_lastdim",
                         [aid, bid, rows, ca, cb](Graph& g, const Tensor& dy) {
                           {
                             Tensor& da = g.grad(g.var(aid));
                             for (std::size_t r = 0; r < rows; ++r)
                               for (std::size_t j = 0; j < ca; ++j)
                                 da[r * ca + j] += dy[r * (ca + cb) + j];
                           }
                           Tensor& db = g.grad(g.var(bid));
                           for (std::size_t r = 0; r < rows; ++r)
                             for (std::size_t j = 0; j < cb; ++j)
                               db[r * cb + j] += dy[r * (ca + cb) + ca + j];
                         });
}

Var concat_rows(Var a, Var b) {
  require_same_graph(a, b, "concat_rows");
  require_rank(a, 2, "concat_rows");
  require_rank(b, 2, "concat_rows");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.dim(1) != bv.dim(1)) {
    throw ShapeError("concat_rows: column mismatch " + shape_string(av.shape()) + " vs " +
                     shape_string(bv.shape()));
  }
  Tensor out({av.dim(0) + bv.dim(0), av.dim(1)});
  std::copy(av.data(), av.data() + av.size(), out.data());
  std::copy(bv.data(), bv.data() + bv.size(), out.data() + av.size());
  const std::size_t aid = a.id, bid = b.id, split = av.size();
  return a.graph->record(std::move(out), "concat_rows",
                         [aid, bid, split](Graph& g, const Tensor& dy) {
                           {
                             Tensor& da = g.grad(g.var(aid));
                             for (std::size_t i = 0; i < da.size(); ++i) da[i] += dy[i];
                           }
                           Tensor& db = g.grad(g.var(bid));
                           for (std::size_t i = 0; i < db.size(); ++i) db[i] += dy[split + i];
                         });
}

Var row(Var x, std::size_t i) {
  require_rank(x, 2, "row");
  const Tensor& in = x.value();
  if (i >= in.dim(0)) {
    throw ShapeError("row: index " + std::to_string(i) + " out of range for " +
                     shape_string(in.shape()));
  }
  const std::size_t d = in.dim(1);
  Tensor out({d}, std::vector<double>(in.data() + i * d, in.data() + (i + 1) * d));
  const std::size_t xid = x.id;
  return x.graph->record(std::move(out), "row", [xid, i, d](Graph& g, const Tensor& dy) {
    Tensor& dx = g.grad(g.var(xid));
    for (std::size_t j = 0; j < d; ++j) dx[i * d + j] += dy[j];
  });
}

Var reshape(Var x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  const std::size_t xid = x.id;
  return x.graph->record(std::move(out), "reshape", [xid](Graph& g, const Tensor& dy) {
    accumulate(g.grad(g.var(xid)), dy);
  });
}

Var global_average_pool(Var x) {
  require_rank(x, 2, "global_average_pool");
  const Tensor& in = x.value();
  const std::size_t n = in.dim(0), d = in.dim(1);
  if (n == 0) throw ShapeError("global_average_pool: no rows to pool");
  Tensor out({d});
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < d; ++j) out[j] += in[r * d + j];
  for (std::size_t j = 0; j < d; ++j) out[j] /= static_cast<double>(n);
  const std::size_t xid = x.id;
  return x.graph->record(std::move(out), "global_average_pool",
                         [xid, n, d](Graph& g, const Tensor& dy) {
                           Tensor& dx = g.grad(g.var(xid));
                           const double inv = 1.0 / static_cast<double>(n);
                           for (std::size_t r = 0; r < n; ++r)
                             for (std::size_t j = 0; j < d; ++j) dx[r * d + j] += dy[j] * inv;
                         });
}

Var sum(Var x) {
  double total = 0.0;
  for (double v : x.value().values()) total += v;
  const std::size_t xid = x.id;
  return x.graph->record(Tensor(Shape{}, total), "sum", [xid](Graph& g, const Tensor& dy) {
    Tensor& dx = g.grad(g.var(xid));
    for (auto& v : dx.values()) v += dy[0];
  });
}

Var dot(Var x, const Tensor& w) {
  const Tensor& in = x.value();
  if (in.size() != w.size()) {
    throw ShapeError("dot: size mismatch " + shape_string(in.shape()) + " vs " +
                     shape_string(w.shape()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < in.size(); ++i) total += in[i] * w[i];
  const std::size_t xid = x.id;
  return x.graph->record(Tensor(Shape{}, total), "dot", [xid, w](Graph& g, const Tensor& dy) {
    Tensor& dx = g.grad(g.var(xid));
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[0] * w[i];
  });
}

Var scaled_dot_attention(Var q, Var k, Var v) {
  require_same_graph(q, k, "attention");
  require_same_graph(q, v, "attention");
  require_rank(q, 2, "attention");
  require_rank(k, 2, "attention");
  require_rank(v, 2, "attention");
  const Tensor& qv = q.value();
  const Tensor& kv = k.value();
  const Tensor& vv = v.value();
  const std::size_t n = qv.dim(0), d = qv.dim(1), m = kv.dim(0), dv = vv.dim(1);
  if (d == 0 || m == 0) {
    throw ShapeError("attention: needs d > 0 and m > 0, got Q " + shape_string(qv.shape()) +
                     ", K " + shape_string(kv.shape()));
  }
  if (kv.dim(1) != d || vv.dim(0) != m) {
    throw ShapeError("attention: incompatible Q " + shape_string(qv.shape()) + ", K " +
                     shape_string(kv.shape()) + ", V " + shape_string(vv.shape()));
  }
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  auto alpha = std::make_shared<Tensor>(Shape{n, m});
  kernels::gemm_nt(n, d, m, qv.data(), kv.data(), alpha->data());
  for (auto& s : alpha->values()) s *= inv_sqrt_d;
  softmax_rows(alpha->data(), n, m);
  Tensor out({n, dv});
  kernels::gemm_nn(n, m, dv, alpha->data(), vv.data(), out.data());

  const std::size_t qid = q.id, kid = k.id, vid = v.id;
  return q.graph->record(
      std::move(out), "attention",
      [qid, kid, vid, alpha, n, d, m, dv, inv_sqrt_d](Graph& g, const Tensor& dy) {
        const Tensor& qval = g.value(g.var(qid));
        const Tensor& kval = g.value(g.var(kid));
        const Tensor& vval = g.value(g.var(vid));
        Tensor d_alpha({n, m});
        kernels::gemm_nt(n, dv, m, dy.data(), vval.data(), d_alpha.data());
        kernels::gemm_tn(n, m, dv, alpha->data(), dy.data(), g.grad(g.var(vid)).data());
        Tensor d_scores({n, m});
        softmax_rows_backward(alpha->data(), d_alpha.data(), d_scores.data(), n, m, inv_sqrt_d);
        kernels::gemm_nn(n, m, d, d_scores.data(), kval.data(), g.grad(g.var(qid)).data());
        kernels::gemm_tn(n, m, d, d_scores.data(), qval.data(), g.grad(g.var(kid)).data());
      });
}

Var weighted_cross_entropy(Var logits, const std::vector<int>& labels,
                           std::array<double, 2> class_weights) {
  require_rank(logits, 2, "weighted_cross_entropy");
  const Tensor& lv = logits.value();
  if (lv.dim(1) != 2) {
    throw ShapeError("weighted_cross_entropy: expected [batch,2] logits, got " +
                     shape_string(lv.shape()));
  }
  const std::size_t batch = lv.dim(0);
  if (labels.size() != batch || batch == 0) {
    throw ShapeError("weighted_cross_entropy: " + std::to_string(labels.size()) +
                     " labels for " + std::to_string(batch) + " rows");
  }
  for (double w : class_weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw Error("class weights must be positive and finite");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error("label " + std::to_string(y) + " not in {0,1}");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    const int y = labels[i];
    // -log softmax(l)[y] = softplus(l_other - l_y)
    const double margin = lv[i * 2 + (1 - y)] - lv[i * 2 + y];
    const double nll = std::max(margin, 0.0) + std::log1p(std::exp(-std::abs(margin)));
    total += class_weights[y] * nll;
  }
  const double inv_batch = 1.0 / static_cast<double>(batch);
  const std::size_t lid = logits.id;
  return logits.graph->record(
      Tensor(Shape{}, total * inv_batch), "weighted_cross_entropy",
      [lid, labels, class_weights, batch, inv_batch](Graph& g, const Tensor& dy) {
        const Tensor& lval = g.value(g.var(lid));
        Tensor& dl = g.grad(g.var(lid));
        for (std::size_t i = 0; i < batch; ++i) {
          const int y = labels[i];
          const double p1 = stable_sigmoid(lval[i * 2 + 1] - lval[i * 2]);
          const double probs[2] = {1.0 - p1, p1};
          const double coef = dy[0] * class_weights[y] * inv_batch;
          for (int c = 0; c < 2; ++c) {
            dl[i * 2 + c] += coef * (probs[c] - (c == y ? 1.0 : 0.0));
          }
        }
      });
}

GmuOutput gmu(Var f_t, Var f_v, const GmuParams& params) {
  require_same_graph(f_t, f_v, "gmu");
  require_rank(f_t, 1, "gmu");
  require_rank(f_v, 1, "gmu");
  const std::size_t in_gate = f_t.value().size() + f_v.value().size();
  if (params.w_z->value.rank() != 2 || params.w_z->value.dim(0) != in_gate) {
    throw ShapeError("gmu: gate weight " + shape_string(params.w_z->value.shape()) +
                     " must take the concatenated input of size " + std::to_string(in_gate));
  }
  Var h_t = tanh(dense(f_t, *params.w_t, *params.b_t));
  Var h_v = tanh(dense(f_v, *params.w_v, *params.b_v));
  if (h_t.shape() != h_v.shape() || params.w_z->value.dim(1) != h_t.value().size()) {
    throw ShapeError("gmu: hidden sizes disagree: text " + shape_string(h_t.shape()) +
                     ", vision " + shape_string(h_v.shape()) + ", gate " +
                     shape_string(params.w_z->value.shape()));
  }
  Var z = sigmoid(dense(concat_lastdim(f_t, f_v), *params.w_z, *params.b_z));
  return GmuOutput{blend(z, h_t, h_v), z, h_t, h_v};
}

Var conv3x3(Var x, Parameter& w, Parameter& b) {
  require_rank(x, 3, "conv3x3");
  const Tensor& in = x.value();
  const std::size_t cin = in.dim(0), h = in.dim(1), wd = in.dim(2);
  if (w.value.rank() != 2 || w.value.dim(1) != cin * 9 || b.value.rank() != 1 ||
      b.value.dim(0) != w.value.dim(0)) {
    throw ShapeError("conv3x3: input " + shape_string(in.shape()) + " incompatible with weight " +
                     shape_string(w.value.shape()) + " and bias " +
                     shape_string(b.value.shape()));
  }
  const std::size_t cout = w.value.dim(0);
  const std::size_t hw = h * wd;
  auto cols = std::make_shared<std::vector<double>>(cin * 9 * hw);
  kernels::im2col3x3(cin, h, wd, in.data(), cols->data());
  Tensor out({cout, h, wd});
  for (std::size_t c = 0; c < cout; ++c) {
    std::fill(out.data() + c * hw, out.data() + (c + 1) * hw, b.value[c]);
  }
  kernels::gemm_nn(cout, cin * 9, hw, w.value.data(), cols->data(), out.data());

  const std::size_t xid = x.id;
  Parameter* wp = &w;
  Parameter* bp = &b;
  return x.graph->record(
      std::move(out), "conv3x3:" + w.name,
      [xid, wp, bp, cols, cin, cout, h, wd, hw](Graph& g, const Tensor& dy) {
        kernels::gemm_nt(cout, hw, cin * 9, dy.data(), cols->data(), wp->grad.data());
        for (std::size_t c = 0; c < cout; ++c) {
          double s = 0.0;
          for (std::size_t i = 0; i < hw; ++i) s += dy[c * hw + i];
          bp->grad[c] += s;
        }
        std::vector<double> dcols(cin * 9 * hw, 0.0);
        kernels::gemm_tn(cout, cin * 9, hw, wp->value.data(), dy.data(), dcols.data());
        kernels::col2im3x3(cin, h, wd, dcols.data(), g.grad(g.var(xid)).data());
      });
}

Var max_pool2(Var x) {
  require_rank(x, 3, "max_pool2");
  const Tensor& in = x.value();
  const std::size_t c = in.dim(0), h = in.dim(1), w = in.dim(2);
  if (h < 2 || w < 2) throw ShapeError("max_pool2: input too small " + shape_string(in.shape()));
  const std::size_t oh = h / 2, ow = w / 2;
  Tensor out({c, oh, ow});
  auto argmax = std::make_shared<std::vector<std::size_t>>(out.size());
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t xx = 0; xx < ow; ++xx) {
        std::size_t best = (ch * h + 2 * y) * w + 2 * xx;
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const std::size_t idx = (ch * h + 2 * y + dy) * w + 2 * xx + dx;
            if (in[idx] > in[best]) best = idx;
          }
        }
        const std::size_t o = (ch * oh + y) * ow + xx;
        out[o] = in[best];
        (*argmax)[o] = best;
      }
    }
  }
  const std::size_t xid = x.id;
  return x.graph->record(std::move(out), "max_pool2", [xid, argmax](Graph& g, const Tensor& dy) {
    Tensor& dx = g.grad(g.var(xid));
    for (std::size_t o = 0; o < argmax->size(); ++o) dx[(*argmax)[o]] += dy[o];
  });
}

Var channels_to_rows(Var x) {
  require_rank(x, 3, "channels_to_rows");
  const Tensor& in = x.value();
  const std::size_t c = in.dim(0), hw = in.dim(1) * in.dim(2);
  Tensor out({hw, c});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t p = 0; p < hw; ++p) out[p * c + ch] = in[ch * hw + p];
  const std::size_t xid = x.id;
  return x.graph->record(std::move(out), "channels_to_rows",
                         [xid, c, hw](Graph& g, const Tensor& dy) {
                           Tensor& dx = g.grad(g.var(xid));
                           for (std::size_t ch = 0; ch < c; ++ch)
                             for (std::size_t p = 0; p < hw; ++p)
                               dx[ch * hw + p] += dy[p * c + ch];
                         });
}

Var embed_tokens(Graph& g, Parameter& start, Parameter& table,
                 const std::vector<std::vector<std::uint32_t>>& buckets) {
  if (start.value.rank() != 1 || table.value.rank() != 2 ||
      table.value.dim(1) != start.value.dim(0)) {
    throw ShapeError("embed_tokens: start " + shape_string(start.value.shape()) +
                     " incompatible with table " + shape_string(table.value.shape()));
  }
  const std::size_t d = start.value.dim(0);
  const std::size_t n_buckets = table.value.dim(0);
  Tensor out({buckets.size() + 1, d});
  std::copy(start.value.data(), start.value.data() + d, out.data());
  for (std::size_t t = 0; t < buckets.size(); ++t) {
    double* dst = out.data() + (t + 1) * d;
    for (std::uint32_t bucket : buckets[t]) {
      if (bucket >= n_buckets) {
        throw ShapeError("embed_tokens: bucket " + std::to_string(bucket) + " out of range " +
                         std::to_string(n_buckets));
      }
      const double* src = table.value.data() + static_cast<std::size_t>(bucket) * d;
      for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
    }
  }
  Parameter* sp = &start;
  Parameter* tp = &table;
  return g.record(std::move(out), "embed_tokens",
                  [sp, tp, buckets, d](Graph&, const Tensor& dy) {
                    for (std::size_t j = 0; j < d; ++j) sp->grad[j] += dy[j];
                    for (std::size_t t = 0; t < buckets.size(); ++t) {
                      const double* src = dy.data() + (t + 1) * d;
                      for (std::uint32_t bucket : buckets[t]) {
                        double* dst = tp->grad.data() + static_cast<std::size_t>(bucket) * d;
                        for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
                      }
                    }
                  });
}

}  // namespace botdna::ops
