#include "botdna/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "botdna/error.hpp"

namespace botdna {

namespace {

double evaluate(const std::function<Var(Graph&)>& fn) {
  Graph g;
  const Var out = fn(g);
  if (out.value().size() != 1) throw ShapeError("grad_check: function is not scalar-valued");
  return out.value()[0];
}

}  // namespace

GradCheckResult grad_check(const std::function<Var(Graph&)>& fn,
                           const std::vector<Parameter*>& params, double eps,
                           std::size_t max_per_param) {
  for (Parameter* p : params) p->zero_grad();
  {
    Graph g;
    const Var out = fn(g);
    g.backward(out);
  }
  std::vector<Tensor> analytic;
  for (const Parameter* p : params) analytic.push_back(p->grad);

  GradCheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    const std::size_t n = p.value.size();
    const std::size_t step =
        (max_per_param == 0 || n <= max_per_param) ? 1 : (n + max_per_param - 1) / max_per_param;
    for (std::size_t i = 0; i < n; i += step) {
      const double saved = p.value[i];
      p.value[i] = saved + eps;
      const double plus = evaluate(fn);
      p.value[i] = saved - eps;
      const double minus = evaluate(fn);
      p.value[i] = saved;
      const double numeric = (plus - minus) / (2.0 * eps);
      const double a = analytic[k][i];
      const double err = std::abs(a - numeric) / std::max(1e-12, std::abs(a) + std::abs(numeric));
      ++result.coordinates;
      if (err > result.max_rel_err) {
        result.max_rel_err = err;
        result.worst = p.name + "[" + std::to_string(i) + "]";
      }
    }
  }
  for (std::size_t k = 0; k < params.size(); ++k) params[k]->grad = analytic[k];
  return result;
}

}  // namespace botdna
