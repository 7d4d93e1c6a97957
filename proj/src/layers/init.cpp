#include "dman/layers/init.hpp"

namespace dman {

Tensor uniform_param(Shape shape, Real range, Rng& rng) {
  std::vector<Real> v(shape_numel(shape));
  for (auto& e : v) e = static_cast<Real>(rng.uniform(-range, range));
  return Tensor(std::move(shape), std::move(v), true);
}

}  // namespace dman
