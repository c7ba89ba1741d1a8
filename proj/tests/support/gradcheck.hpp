#pragma once

// Central finite-difference gradient checking.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "kws/autodiff/tape.hpp"

namespace kws::testing {

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst;  // "param[i]" of the worst element
  long checked = 0;
};

// loss_fn must rebuild the forward pass from current parameter values and
// return the scalar loss. The analytic grads must already be accumulated in
// each parameter (one backward pass, zeroed beforehand).
inline GradCheckResult finite_difference_check(
    const std::vector<Parameter*>& params,
    const std::function<double()>& loss_fn, double eps = 1e-5) {
  GradCheckResult result;
  for (Parameter* p : params) {
    for (std::int64_t i = 0; i < p->value.size(); ++i) {
      const double orig = p->value[i];
      p->value[i] = orig + eps;
      const double fp = loss_fn();
      p->value[i] = orig - eps;
      const double fm = loss_fn();
      p->value[i] = orig;
      const double fd = (fp - fm) / (2.0 * eps);
      const double an = p->grad[i];
      const double denom = std::max({std::abs(fd), std::abs(an), 1e-6});
      const double rel = std::abs(fd - an) / denom;
      ++result.checked;
      if (rel > result.max_rel_err) {
        result.max_rel_err = rel;
        result.worst = p->name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return result;
}

}  // namespace kws::testing
