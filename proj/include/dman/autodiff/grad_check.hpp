#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "dman/autodiff/tensor.hpp"

namespace dman {

struct GradCheckReport {
  bool passed = false;
  // Set when the function could not be checked (nondeterministic, non-scalar).
  bool rejected = false;
  std::string reason;
  double max_rel_error = 0;
  std::size_t worst_index = 0;
  std::vector<double> analytic;
  std::vector<double> numeric;
};

struct GradCheckOptions {
  double step = 1e-5;
  double tol = 1e-5;
  // Denominator floor of the relative error |a - n| / max(|a|, |n|, floor);
  // keeps near-zero gradient entries from amplifying round-off.
  double floor = 1e-5;
};

using ScalarFn = std::function<Tensor(const Tensor&)>;

// Compares reverse-mode gradients of f at x against central differences.
// f must be scalar-valued and deterministic: a tape that records a stochastic
// op (training-mode dropout) is rejected.
GradCheckReport grad_check(const ScalarFn& f, const Tensor& x, const GradCheckOptions& opts = {});

// Same check for a function of parameters captured by reference: every
// tensor in `params` must require grad; each entry is perturbed in place and
// restored afterwards.
GradCheckReport grad_check_params(const std::function<Tensor()>& f, std::vector<Tensor> params,
                                  const GradCheckOptions& opts = {});

}  // namespace dman
