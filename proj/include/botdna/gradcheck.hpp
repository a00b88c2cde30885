#pragma once

#include <functional>
#include <vector>

#include "botdna/graph.hpp"
#include "botdna/tensor.hpp"

namespace botdna {

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::size_t coordinates = 0;
  std::string worst;  // "<param>[<index>]"
};

// Compares reverse-mode gradients of a scalar function against central
// differences, perturbing every coordinate of every listed parameter.
// rel_err = |a - n| / max(1e-12, |a| + |n|).
// `fn` must build the scalar from the current parameter values.
// max_per_param > 0 limits the check to that many evenly spaced coordinates
// of each parameter.
GradCheckResult grad_check(const std::function<Var(Graph&)>& fn,
                           const std::vector<Parameter*>& params,
                           double eps = 1e-6, std::size_t max_per_param = 0);

}  // namespace botdna
