#include "dman/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dman/rng.hpp"
#include "dman/simd/kernels.hpp"

namespace dman::ops {
namespace {

using Impl = detail::TensorImpl;
using ImplPtr = std::shared_ptr<Impl>;

const simd::KernelTable<Real>& K() { return simd::kernels<Real>(); }

// Output requires grad iff a tape is recording and some input requires grad.
bool tracking(std::initializer_list<const Tensor*> inputs) {
  if (!Tape::current()) return false;
  for (const Tensor* t : inputs)
    if (t->requires_grad()) return true;
  return false;
}

Tensor make_output(Shape shape, std::vector<Real> values, bool track) {
  auto im = std::make_shared<Impl>();
  im->shape = std::move(shape);
  im->values = std::move(values);
  if (track) {
    im->requires_grad = true;
    im->grad.assign(im->values.size(), 0);
  }
  return Tensor(std::move(im));
}

void record(OpKind kind, std::vector<ImplPtr> inputs, const Tensor& out,
            std::function<void(const TapeRecord&)> backward) {
  Tape::current()->record(TapeRecord{kind, std::move(inputs), out.impl(), std::move(backward)});
}

struct AxisSplit {
  std::size_t outer, len, inner;
};

AxisSplit split_axis(const Shape& s, std::size_t axis, const char* op) {
  if (axis >= s.size())
    throw DimensionError(std::string(op) + ": axis " + std::to_string(axis) + " out of range for shape " +
                         shape_str(s));
  AxisSplit a{1, s[axis], 1};
  for (std::size_t i = 0; i < axis; ++i) a.outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) a.inner *= s[i];
  return a;
}

void require_rank(const Tensor& t, std::size_t r, const char* op) {
  if (t.rank() != r)
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(r) + ", got shape " +
                         shape_str(t.shape()));
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k)
    throw DimensionError("matmul: inner extents differ for " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
  const auto& kt = K();
  const Real* av = a.values().data();
  const Real* bv = b.values().data();
  std::vector<Real> c(m * n, Real(0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const Real s = av[i * k + p];
      if (s != Real(0)) kt.axpy(s, bv + p * n, c.data() + i * n, n);
    }
  const bool track = tracking({&a, &b});
  Tensor out = make_output({m, n}, std::move(c), track);
  if (track) {
    record(OpKind::matmul, {a.impl(), b.impl()}, out, [m, k, n](const TapeRecord& r) {
      const auto& kt = K();
      Impl& A = *r.inputs[0];
      Impl& B = *r.inputs[1];
      const Real* g = r.output->grad.data();
      if (A.requires_grad)
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) A.grad[i * k + p] += kt.dot(g + i * n, B.values.data() + p * n, n);
      if (B.requires_grad)
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            const Real s = A.values[i * k + p];
            if (s != Real(0)) kt.axpy(s, g + i * n, B.grad.data() + p * n, n);
          }
    });
  }
  return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul_nt");
  require_rank(b, 2, "matmul_nt");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(0);
  if (b.dim(1) != k)
    throw DimensionError("matmul_nt: inner extents differ for " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()) + "^T");
  const auto& kt = K();
  const Real* av = a.values().data();
  const Real* bv = b.values().data();
  std::vector<Real> c(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] = kt.dot(av + i * k, bv + j * k, k);
  const bool track = tracking({&a, &b});
  Tensor out = make_output({m, n}, std::move(c), track);
  if (track) {
    record(OpKind::matmul_nt, {a.impl(), b.impl()}, out, [m, k, n](const TapeRecord& r) {
      const auto& kt = K();
      Impl& A = *r.inputs[0];
      Impl& B = *r.inputs[1];
      const Real* g = r.output->grad.data();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const Real gij = g[i * n + j];
          if (gij == Real(0)) continue;
          if (A.requires_grad) kt.axpy(gij, B.values.data() + j * k, A.grad.data() + i * k, k);
          if (B.requires_grad) kt.axpy(gij, A.values.data() + i * k, B.grad.data() + j * k, k);
        }
    });
  }
  return out;
}

Tensor transpose(const Tensor& a) {
  require_rank(a, 2, "transpose");
  const std::size_t m = a.dim(0), n = a.dim(1);
  const auto v = a.values();
  std::vector<Real> t(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) t[j * m + i] = v[i * n + j];
  const bool track = tracking({&a});
  Tensor out = make_output({n, m}, std::move(t), track);
  if (track) {
    record(OpKind::transpose, {a.impl()}, out, [m, n](const TapeRecord& r) {
      Impl& A = *r.inputs[0];
      const auto& g = r.output->grad;
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) A.grad[i * n + j] += g[j * m + i];
    });
  }
  return out;
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat: no tensors given");
  const Shape& ref = parts[0].shape();
  if (axis >= ref.size())
    throw DimensionError("concat: axis " + std::to_string(axis) + " out of range for shape " + shape_str(ref));
  Shape out_shape = ref;
  out_shape[axis] = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == ref.size();
    for (std::size_t d = 0; ok && d < s.size(); ++d)
      if (d != axis && s[d] != ref[d]) ok = false;
    if (!ok)
      throw DimensionError("concat: shape " + shape_str(s) + " does not match " + shape_str(ref) +
                           " off axis " + std::to_string(axis));
    out_shape[axis] += s[axis];
  }
  const AxisSplit o = split_axis(out_shape, axis, "concat");
  const std::size_t out_row = o.len * o.inner;
  std::vector<Real> v(shape_numel(out_shape));
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  bool track = false;
  for (const auto& p : parts) {
    const std::size_t chunk = p.dim(axis) * o.inner;
    const Real* src = p.values().data();
    for (std::size_t q = 0; q < o.outer; ++q)
      std::copy_n(src + q * chunk, chunk, v.data() + q * out_row + off);
    offsets.push_back(off);
    off += chunk;
    track = track || p.requires_grad();
  }
  track = track && Tape::current();
  Tensor out = make_output(out_shape, std::move(v), track);
  if (track) {
    std::vector<ImplPtr> ins;
    for (const auto& p : parts) ins.push_back(p.impl());
    record(OpKind::concat, std::move(ins), out,
           [offsets, outer = o.outer, out_row](const TapeRecord& r) {
             const auto& kt = K();
             const Real* g = r.output->grad.data();
             for (std::size_t t = 0; t < r.inputs.size(); ++t) {
               Impl& in = *r.inputs[t];
               if (!in.requires_grad) continue;
               const std::size_t chunk = in.values.size() / outer;
               for (std::size_t q = 0; q < outer; ++q)
                 kt.add_acc(g + q * out_row + offsets[t], in.grad.data() + q * chunk, chunk);
             }
           });
  }
  return out;
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t length) {
  const AxisSplit a = split_axis(x.shape(), axis, "slice");
  if (length == 0 || start + length > a.len)
    throw DimensionError("slice: range [" + std::to_string(start) + ", " + std::to_string(start + length) +
                         ") invalid for axis " + std::to_string(axis) + " of shape " + shape_str(x.shape()));
  Shape s = x.shape();
  s[axis] = length;
  const std::size_t in_row = a.len * a.inner, out_row = length * a.inner, off = start * a.inner;
  std::vector<Real> v(a.outer * out_row);
  const Real* src = x.values().data();
  for (std::size_t q = 0; q < a.outer; ++q) std::copy_n(src + q * in_row + off, out_row, v.data() + q * out_row);
  const bool track = tracking({&x});
  Tensor out = make_output(std::move(s), std::move(v), track);
  if (track) {
    record(OpKind::slice, {x.impl()}, out, [a, in_row, out_row, off](const TapeRecord& r) {
      const auto& kt = K();
      Impl& X = *r.inputs[0];
      for (std::size_t q = 0; q < a.outer; ++q)
        kt.add_acc(r.output->grad.data() + q * out_row, X.grad.data() + q * in_row + off, out_row);
    });
  }
  return out;
}

Tensor elementwise(Elementwise kind, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw DimensionError("elementwise: shapes differ, " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  const std::size_t n = a.numel();
  const Real* av = a.values().data();
  const Real* bv = b.values().data();
  std::vector<Real> v(n);
  switch (kind) {
    case Elementwise::add:
      for (std::size_t i = 0; i < n; ++i) v[i] = av[i] + bv[i];
      break;
    case Elementwise::sub:
      for (std::size_t i = 0; i < n; ++i) v[i] = av[i] - bv[i];
      break;
    case Elementwise::mul:
      K().mul(av, bv, v.data(), n);
      break;
  }
  const bool track = tracking({&a, &b});
  Tensor out = make_output(a.shape(), std::move(v), track);
  if (track) {
    const OpKind op = kind == Elementwise::add ? OpKind::add : kind == Elementwise::sub ? OpKind::sub : OpKind::mul;
    record(op, {a.impl(), b.impl()}, out, [kind, n](const TapeRecord& r) {
      const auto& kt = K();
      Impl& A = *r.inputs[0];
      Impl& B = *r.inputs[1];
      const Real* g = r.output->grad.data();
      switch (kind) {
        case Elementwise::add:
          if (A.requires_grad) kt.add_acc(g, A.grad.data(), n);
          if (B.requires_grad) kt.add_acc(g, B.grad.data(), n);
          break;
        case Elementwise::sub:
          if (A.requires_grad) kt.add_acc(g, A.grad.data(), n);
          if (B.requires_grad) kt.axpy(Real(-1), g, B.grad.data(), n);
          break;
        case Elementwise::mul:
          if (A.requires_grad) kt.mul_acc(g, B.values.data(), A.grad.data(), n);
          if (B.requires_grad) kt.mul_acc(g, A.values.data(), B.grad.data(), n);
          break;
      }
    });
  }
  return out;
}

Tensor scale(const Tensor& x, Real factor) {
  std::vector<Real> v(x.values().begin(), x.values().end());
  for (auto& e : v) e *= factor;
  const bool track = tracking({&x});
  Tensor out = make_output(x.shape(), std::move(v), track);
  if (track) {
    record(OpKind::scale, {x.impl()}, out, [factor](const TapeRecord& r) {
      Impl& X = *r.inputs[0];
      K().axpy(factor, r.output->grad.data(), X.grad.data(), X.grad.size());
    });
  }
  return out;
}

Tensor activation(Activation kind, const Tensor& x) {
  const auto xv = x.values();
  std::vector<Real> v(xv.size());
  switch (kind) {
    case Activation::relu:
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = xv[i] > Real(0) ? xv[i] : Real(0);
      break;
    case Activation::tanh:
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::tanh(xv[i]);
      break;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < v.size(); ++i) {
        const Real z = xv[i];
        if (z >= Real(0)) {
          v[i] = Real(1) / (Real(1) + std::exp(-z));
        } else {
          const Real e = std::exp(z);
          v[i] = e / (Real(1) + e);
        }
      }
      break;
  }
  const bool track = tracking({&x});
  Tensor out = make_output(x.shape(), std::move(v), track);
  if (track) {
    const OpKind op = kind == Activation::relu ? OpKind::relu : kind == Activation::tanh ? OpKind::tanh : OpKind::sigmoid;
    record(op, {x.impl()}, out, [kind](const TapeRecord& r) {
      Impl& X = *r.inputs[0];
      const auto& y = r.output->values;
      const auto& g = r.output->grad;
      for (std::size_t i = 0; i < y.size(); ++i) {
        switch (kind) {
          case Activation::relu: X.grad[i] += y[i] > Real(0) ? g[i] : Real(0); break;
          case Activation::tanh: X.grad[i] += g[i] * (Real(1) - y[i] * y[i]); break;
          case Activation::sigmoid: X.grad[i] += g[i] * y[i] * (Real(1) - y[i]); break;
        }
      }
    });
  }
  return out;
}

Tensor log(const Tensor& x, Real floor) {
  const auto xv = x.values();
  std::vector<Real> v(xv.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::log(std::max(xv[i], floor));
  const bool track = tracking({&x});
  Tensor out = make_output(x.shape(), std::move(v), track);
  if (track) {
    record(OpKind::log, {x.impl()}, out, [floor](const TapeRecord& r) {
      Impl& X = *r.inputs[0];
      const auto& g = r.output->grad;
      for (std::size_t i = 0; i < g.size(); ++i)
        if (X.values[i] > floor) X.grad[i] += g[i] / X.values[i];
    });
  }
  return out;
}

Tensor softmax(const Tensor& x, std::size_t axis) {
  const AxisSplit a = split_axis(x.shape(), axis, "softmax");
  const Real* xv = x.values().data();
  std::vector<Real> v(x.numel());
  for (std::size_t q = 0; q < a.outer; ++q)
    for (std::size_t in = 0; in < a.inner; ++in) {
      const std::size_t base = q * a.len * a.inner + in;
      Real mx = xv[base];
      for (std::size_t l = 1; l < a.len; ++l) mx = std::max(mx, xv[base + l * a.inner]);
      Real z = 0;
      for (std::size_t l = 0; l < a.len; ++l) {
        const Real e = std::exp(xv[base + l * a.inner] - mx);
        v[base + l * a.inner] = e;
        z += e;
      }
      for (std::size_t l = 0; l < a.len; ++l) v[base + l * a.inner] /= z;
    }
  const bool track = tracking({&x});
  Tensor out = make_output(x.shape(), std::move(v), track);
  if (track) {
    record(OpKind::softmax, {x.impl()}, out, [a](const TapeRecord& r) {
      Impl& X = *r.inputs[0];
      const auto& y = r.output->values;
      const auto& g = r.output->grad;
      for (std::size_t q = 0; q < a.outer; ++q)
        for (std::size_t in = 0; in < a.inner; ++in) {
          const std::size_t base = q * a.len * a.inner + in;
          Real dotgy = 0;
          for (std::size_t l = 0; l < a.len; ++l) dotgy += g[base + l * a.inner] * y[base + l * a.inner];
          for (std::size_t l = 0; l < a.len; ++l) {
            const std::size_t idx = base + l * a.inner;
            X.grad[idx] += y[idx] * (g[idx] - dotgy);
          }
        }
    });
  }
  return out;
}

Tensor max_over_axis(const Tensor& x, std::size_t axis) {
  const AxisSplit a = split_axis(x.shape(), axis, "max_over_axis");
  if (a.len == 0) throw DimensionError("max_over_axis: empty axis in shape " + shape_str(x.shape()));
  Shape s = x.shape();
  s.erase(s.begin() + static_cast<std::ptrdiff_t>(axis));
  const Real* xv = x.values().data();
  std::vector<Real> v(a.outer * a.inner);
  std::vector<std::size_t> arg(v.size());
  for (std::size_t q = 0; q < a.outer; ++q)
    for (std::size_t in = 0; in < a.inner; ++in) {
      const std::size_t base = q * a.len * a.inner + in;
      std::size_t best = base;
      for (std::size_t l = 1; l < a.len; ++l)
        if (xv[base + l * a.inner] > xv[best]) best = base + l * a.inner;
      v[q * a.inner + in] = xv[best];
      arg[q * a.inner + in] = best;
    }
  const bool track = tracking({&x});
  Tensor out = make_output(std::move(s), std::move(v), track);
  if (track) {
    record(OpKind::max_over_axis, {x.impl()}, out, [arg = std::move(arg)](const TapeRecord& r) {
      Impl& X = *r.inputs[0];
      const auto& g = r.output->grad;
      for (std::size_t i = 0; i < g.size(); ++i) X.grad[arg[i]] += g[i];
    });
  }
  return out;
}

Tensor sum(const Tensor& x) {
  const auto xv = x.values();
  const Real s = std::accumulate(xv.begin(), xv.end(), Real(0));
  const bool track = tracking({&x});
  Tensor out = make_output({}, {s}, track);
  if (track) {
    record(OpKind::sum, {x.impl()}, out, [](const TapeRecord& r) {
      Impl& X = *r.inputs[0];
      const Real g = r.output->grad[0];
      for (auto& e : X.grad) e += g;
    });
  }
  return out;
}

Tensor mean(const Tensor& x) { return scale(sum(x), Real(1) / static_cast<Real>(x.numel())); }

Tensor sum_over_axis(const Tensor& x, std::size_t axis) {
  const AxisSplit a = split_axis(x.shape(), axis, "sum_over_axis");
  Shape s = x.shape();
  s.erase(s.begin() + static_cast<std::ptrdiff_t>(axis));
  const Real* xv = x.values().data();
  std::vector<Real> v(a.outer * a.inner, Real(0));
  for (std::size_t q = 0; q < a.outer; ++q)
    for (std::size_t l = 0; l < a.len; ++l)
      K().add_acc(xv + (q * a.len + l) * a.inner, v.data() + q * a.inner, a.inner);
  const bool track = tracking({&x});
  Tensor out = make_output(std::move(s), std::move(v), track);
  if (track) {
    record(OpKind::sum_over_axis, {x.impl()}, out, [a](const TapeRecord& r) {
      Impl& X = *r.inputs[0];
      for (std::size_t q = 0; q < a.outer; ++q)
        for (std::size_t l = 0; l < a.len; ++l)
          K().add_acc(r.output->grad.data() + q * a.inner, X.grad.data() + (q * a.len + l) * a.inner, a.inner);
    });
  }
  return out;
}

Tensor dropout(const Tensor& x, Real keep_prob, bool training, std::uint64_t seed) {
  if (!(keep_prob > Real(0) && keep_prob <= Real(1)))
    throw std::invalid_argument("dropout: keep_prob must lie in (0, 1], got " + std::to_string(keep_prob));
  if (!training || keep_prob == Real(1)) return x;
  Rng rng(seed);
  const Real inv = Real(1) / keep_prob;
  const auto xv = x.values();
  std::vector<Real> mask(xv.size());
  std::vector<Real> v(xv.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    mask[i] = rng.bernoulli(static_cast<double>(keep_prob)) ? inv : Real(0);
    v[i] = xv[i] * mask[i];
  }
  if (Tape* t = Tape::current()) t->mark_stochastic();
  const bool track = tracking({&x});
  Tensor out = make_output(x.shape(), std::move(v), track);
  if (track) {
    record(OpKind::dropout, {x.impl()}, out, [mask = std::move(mask)](const TapeRecord& r) {
      K().mul_acc(r.output->grad.data(), mask.data(), r.inputs[0]->grad.data(), mask.size());
    });
  }
  return out;
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel())
    throw DimensionError("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  for (auto e : shape)
    if (e == 0) throw DimensionError("reshape: zero extent in " + shape_str(shape));
  const bool track = tracking({&x});
  Tensor out = make_output(std::move(shape), std::vector<Real>(x.values().begin(), x.values().end()), track);
  if (track) {
    record(OpKind::reshape, {x.impl()}, out, [](const TapeRecord& r) {
      Impl& X = *r.inputs[0];
      K().add_acc(r.output->grad.data(), X.grad.data(), X.grad.size());
    });
  }
  return out;
}

Tensor expand(const Tensor& x, std::size_t axis, std::size_t count) {
  const AxisSplit a = split_axis(x.shape(), axis, "expand");
  if (a.len != 1)
    throw DimensionError("expand: axis " + std::to_string(axis) + " of " + shape_str(x.shape()) +
                         " must have extent 1");
  if (count == 0) throw DimensionError("expand: count must be positive");
  Shape s = x.shape();
  s[axis] = count;
  const Real* xv = x.values().data();
  std::vector<Real> v(a.outer * count * a.inner);
  for (std::size_t q = 0; q < a.outer; ++q)
    for (std::size_t c = 0; c < count; ++c) std::copy_n(xv + q * a.inner, a.inner, v.data() + (q * count + c) * a.inner);
  const bool track = tracking({&x});
  Tensor out = make_output(std::move(s), std::move(v), track);
  if (track) {
    record(OpKind::expand, {x.impl()}, out, [a, count](const TapeRecord& r) {
      Impl& X = *r.inputs[0];
      for (std::size_t q = 0; q < a.outer; ++q)
        for (std::size_t c = 0; c < count; ++c)
          K().add_acc(r.output->grad.data() + (q * count + c) * a.inner, X.grad.data() + q * a.inner, a.inner);
    });
  }
  return out;
}

Tensor gather_rows(const Tensor& table, const std::vector<std::size_t>& ids) {
  require_rank(table, 2, "gather_rows");
  if (ids.empty()) throw DimensionError("gather_rows: empty id list");
  const std::size_t rows = table.dim(0), d = table.dim(1);
  const Real* tv = table.values().data();
  std::vector<Real> v(ids.size() * d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= rows)
      throw DimensionError("gather_rows: id " + std::to_string(ids[i]) + " out of range for table " +
                           shape_str(table.shape()));
    std::copy_n(tv + ids[i] * d, d, v.data() + i * d);
  }
  const bool track = tracking({&table});
  Tensor out = make_output({ids.size(), d}, std::move(v), track);
  if (track) {
    record(OpKind::gather_rows, {table.impl()}, out, [ids, d](const TapeRecord& r) {
      Impl& T = *r.inputs[0];
      for (std::size_t i = 0; i < ids.size(); ++i)
        K().add_acc(r.output->grad.data() + i * d, T.grad.data() + ids[i] * d, d);
    });
  }
  return out;
}

Tensor windows(const Tensor& x, std::size_t width) {
  require_rank(x, 2, "windows");
  const std::size_t len = x.dim(0), d = x.dim(1);
  if (width == 0 || width > len)
    throw DimensionError("windows: width " + std::to_string(width) + " invalid for shape " + shape_str(x.shape()));
  const std::size_t count = len - width + 1, row = width * d;
  const Real* xv = x.values().data();
  std::vector<Real> v(count * row);
  for (std::size_t t = 0; t < count; ++t) std::copy_n(xv + t * d, row, v.data() + t * row);
  const bool track = tracking({&x});
  Tensor out = make_output({count, row}, std::move(v), track);
  if (track) {
    record(OpKind::windows, {x.impl()}, out, [count, row, d](const TapeRecord& r) {
      Impl& X = *r.inputs[0];
      for (std::size_t t = 0; t < count; ++t)
        K().add_acc(r.output->grad.data() + t * row, X.grad.data() + t * d, row);
    });
  }
  return out;
}

Tensor pick(const Tensor& x, std::size_t flat_index) {
  if (flat_index >= x.numel())
    throw DimensionError("pick: index " + std::to_string(flat_index) + " out of range for shape " +
                         shape_str(x.shape()));
  const bool track = tracking({&x});
  Tensor out = make_output({}, {x.values()[flat_index]}, track);
  if (track) {
    record(OpKind::pick, {x.impl()}, out, [flat_index](const TapeRecord& r) {
      r.inputs[0]->grad[flat_index] += r.output->grad[0];
    });
  }
  return out;
}

}  // namespace dman::ops
