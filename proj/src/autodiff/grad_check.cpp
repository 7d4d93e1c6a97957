#include "dman/autodiff/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "dman/autodiff/tape.hpp"

namespace dman {
namespace {

double rel_error(double a, double n, double floor) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
}

double eval_untaped(const std::function<Tensor()>& f) {
  NoTapeScope guard;
  return static_cast<double>(f().item());
}

}  // namespace

GradCheckReport grad_check_params(const std::function<Tensor()>& f, std::vector<Tensor> params,
                                  const GradCheckOptions& opts) {
  GradCheckReport rep;
  for (auto& p : params) {
    if (!p.requires_grad()) {
      rep.rejected = true;
      rep.reason = "parameter without grad slot";
      return rep;
    }
    p.zero_grad();
  }

  Tape tape;
  {
    TapeScope scope(tape);
    Tensor y = f();
    if (tape.stochastic()) {
      rep.rejected = true;
      rep.reason = "function is nondeterministic (stochastic op recorded)";
      return rep;
    }
    if (y.numel() != 1) {
      rep.rejected = true;
      rep.reason = "function is not scalar-valued, shape " + shape_str(y.shape());
      return rep;
    }
    if (!tape.empty()) tape.backward(y);
  }

  for (auto& p : params) {
    const auto g = p.grad();
    for (std::size_t i = 0; i < p.numel(); ++i) {
      const Real saved = p.values()[i];
      p.mutable_values()[i] = saved + static_cast<Real>(opts.step);
      const double up = eval_untaped(f);
      p.mutable_values()[i] = saved - static_cast<Real>(opts.step);
      const double down = eval_untaped(f);
      p.mutable_values()[i] = saved;
      const double num = (up - down) / (2 * opts.step);
      const double ana = static_cast<double>(g[i]);
      const double err = rel_error(ana, num, opts.floor);
      if (err > rep.max_rel_error || rep.analytic.empty()) {
        if (err > rep.max_rel_error) rep.worst_index = rep.analytic.size();
        rep.max_rel_error = std::max(rep.max_rel_error, err);
      }
      rep.analytic.push_back(ana);
      rep.numeric.push_back(num);
    }
  }
  rep.passed = rep.max_rel_error <= opts.tol;
  return rep;
}

GradCheckReport grad_check(const ScalarFn& f, const Tensor& x, const GradCheckOptions& opts) {
  Tensor leaf = x.detach();
  leaf.set_requires_grad(true);
  return grad_check_params([&] { return f(leaf); }, {leaf}, opts);
}

}  // namespace dman
