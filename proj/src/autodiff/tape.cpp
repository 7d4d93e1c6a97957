#include "dman/autodiff/tape.hpp"

#include <stdexcept>

namespace dman {
namespace {
thread_local Tape* g_current = nullptr;
}

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::matmul: return "matmul";
    case OpKind::matmul_nt: return "matmul_nt";
    case OpKind::transpose: return "transpose";
    case OpKind::concat: return "concat";
    case OpKind::slice: return "slice";
    case OpKind::add: return "add";
    case OpKind::sub: return "sub";
    case OpKind::mul: return "mul";
    case OpKind::scale: return "scale";
    case OpKind::relu: return "relu";
    case OpKind::tanh: return "tanh";
    case OpKind::sigmoid: return "sigmoid";
    case OpKind::log: return "log";
    case OpKind::softmax: return "softmax";
    case OpKind::max_over_axis: return "max_over_axis";
    case OpKind::sum: return "sum";
    case OpKind::sum_over_axis: return "sum_over_axis";
    case OpKind::dropout: return "dropout";
    case OpKind::reshape: return "reshape";
    case OpKind::expand: return "expand";
    case OpKind::gather_rows: return "gather_rows";
    case OpKind::windows: return "windows";
    case OpKind::pick: return "pick";
  }
  return "unknown";
}

Tape* Tape::current() { return g_current; }

void Tape::record(TapeRecord rec) {
  if (consumed_) throw std::logic_error("recording onto a tape that was already backpropagated; call reset()");
  records_.push_back(std::move(rec));
}

std::size_t Tape::backward(const Tensor& loss) {
  if (consumed_) throw std::logic_error("backward called twice on the same tape without reset()");
  if (!loss.defined() || loss.numel() != 1)
    throw std::invalid_argument("backward needs a scalar loss, got shape " +
                                (loss.defined() ? shape_str(loss.shape()) : std::string("<undefined>")));
  if (records_.empty()) throw std::logic_error("backward on an empty tape");
  consumed_ = true;
  auto& out = *loss.impl();
  if (!out.requires_grad) return 0;
  out.grad[0] += Real(1);
  std::size_t visited = 0;
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    it->backward(*it);
    ++visited;
  }
  return visited;
}

void Tape::reset() {
  records_.clear();
  consumed_ = false;
  stochastic_ = false;
}

TapeScope::TapeScope(Tape& tape) : previous_(g_current) { g_current = &tape; }
TapeScope::~TapeScope() { g_current = previous_; }

NoTapeScope::NoTapeScope() : previous_(g_current) { g_current = nullptr; }
NoTapeScope::~NoTapeScope() { g_current = previous_; }

}  // namespace dman
