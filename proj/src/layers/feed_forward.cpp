#include "dman/layers/feed_forward.hpp"

#include "dman/autodiff/ops.hpp"

namespace dman {

Tensor affine(const Tensor& W, const Tensor& b, const Tensor& x) {
  if (W.rank() != 2 || b.rank() != 1 || b.dim(0) != W.dim(0))
    throw DimensionError("affine: weight " + shape_str(W.shape()) + " and bias " + shape_str(b.shape()) +
                         " disagree");
  const std::size_t out = W.dim(0);
  const bool single = x.rank() == 1;
  Tensor rows = single ? ops::reshape(x, {1, x.dim(0)}) : x;
  if (rows.rank() != 2 || rows.dim(1) != W.dim(1))
    throw DimensionError("affine: input " + shape_str(x.shape()) + " does not match weight " + shape_str(W.shape()));
  Tensor y = ops::add(ops::matmul_nt(rows, W), ops::expand(ops::reshape(b, {1, out}), 0, rows.dim(0)));
  return single ? ops::reshape(y, {out}) : y;
}

Tensor feed_forward_relu(const Tensor& W, const Tensor& b, const Tensor& x) { return ops::relu(affine(W, b, x)); }

}  // namespace dman
