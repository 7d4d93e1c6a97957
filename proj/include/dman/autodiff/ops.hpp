#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dman/autodiff/tape.hpp"
#include "dman/autodiff/tensor.hpp"

namespace dman {

// Raised for any shape inconsistency; the message names the offending shapes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace ops {

// No op broadcasts implicitly: shape adaptation goes through expand/reshape.

Tensor matmul(const Tensor& a, const Tensor& b);     // [m,k] x [k,n] -> [m,n]
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // [m,k] x [n,k]^T -> [m,n]
Tensor transpose(const Tensor& a);                   // rank 2 only

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t length);

enum class Elementwise { add, sub, mul };
Tensor elementwise(Elementwise kind, const Tensor& a, const Tensor& b);
inline Tensor add(const Tensor& a, const Tensor& b) { return elementwise(Elementwise::add, a, b); }
inline Tensor sub(const Tensor& a, const Tensor& b) { return elementwise(Elementwise::sub, a, b); }
inline Tensor mul(const Tensor& a, const Tensor& b) { return elementwise(Elementwise::mul, a, b); }
Tensor scale(const Tensor& x, Real factor);

enum class Activation { relu, tanh, sigmoid };
Tensor activation(Activation kind, const Tensor& x);
inline Tensor relu(const Tensor& x) { return activation(Activation::relu, x); }
inline Tensor tanh(const Tensor& x) { return activation(Activation::tanh, x); }
inline Tensor sigmoid(const Tensor& x) { return activation(Activation::sigmoid, x); }

// log(max(x, floor)); the gradient is zero where the floor is active.
Tensor log(const Tensor& x, Real floor = 0);

// Max-shifted softmax along one axis.
Tensor softmax(const Tensor& x, std::size_t axis);

// Reduces the axis away. Backward routes to the first maximal element.
Tensor max_over_axis(const Tensor& x, std::size_t axis);

Tensor sum(const Tensor& x);  // rank-0 result
Tensor mean(const Tensor& x);
Tensor sum_over_axis(const Tensor& x, std::size_t axis);

// Inverted dropout: survivors are scaled by 1/keep_prob so eval is identity.
// keep_prob must lie in (0, 1].
Tensor dropout(const Tensor& x, Real keep_prob, bool training, std::uint64_t seed);

Tensor reshape(const Tensor& x, Shape shape);
// Repeats an extent-1 axis `count` times.
Tensor expand(const Tensor& x, std::size_t axis, std::size_t count);

// Row lookup into a [rows, d] table -> [ids.size(), d].
Tensor gather_rows(const Tensor& table, const std::vector<std::size_t>& ids);

// Sliding windows over the rows of [L, d]: row t of the result is rows
// t..t+width-1 flattened, giving [L - width + 1, width * d].
Tensor windows(const Tensor& x, std::size_t width);

// Single element by flat index, rank-0 result.
Tensor pick(const Tensor& x, std::size_t flat_index);

}  // namespace ops
}  // namespace dman
