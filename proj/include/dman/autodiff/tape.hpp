#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string_view>
#include <vector>

#include "dman/autodiff/tensor.hpp"

namespace dman {

enum class OpKind {
  matmul,
  matmul_nt,
  transpose,
  concat,
  slice,
  add,
  sub,
  mul,
  scale,
  relu,
  tanh,
  sigmoid,
  log,
  softmax,
  max_over_axis,
  sum,
  sum_over_axis,
  dropout,
  reshape,
  expand,
  gather_rows,
  windows,
  pick,
};

std::string_view op_name(OpKind kind);

struct TapeRecord {
  OpKind kind;
  std::vector<std::shared_ptr<detail::TensorImpl>> inputs;
  std::shared_ptr<detail::TensorImpl> output;
  // Reads output->grad and accumulates into the grad slot of every input that
  // has one. Saved activations live in the closure.
  std::function<void(const TapeRecord&)> backward;
};

// Records differentiable ops in construction order. Ops record onto the tape
// that is current on the calling thread (see TapeScope); with no current tape,
// or with no grad-requiring inputs, ops compute values only.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  static Tape* current();

  void record(TapeRecord rec);

  // Seeds d(loss)/d(loss) = 1 and replays every record once in reverse order.
  // Returns the number of records visited. Throws std::invalid_argument for a
  // non-scalar loss and std::logic_error when called twice without reset().
  std::size_t backward(const Tensor& loss);

  void reset();

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::vector<TapeRecord>& records() const { return records_; }

  // Set by ops whose output depends on random draws (training-mode dropout).
  void mark_stochastic() { stochastic_ = true; }
  bool stochastic() const { return stochastic_; }

 private:
  std::vector<TapeRecord> records_;
  bool consumed_ = false;
  bool stochastic_ = false;
};

class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

// Runs a block with no current tape (pure evaluation).
class NoTapeScope {
 public:
  NoTapeScope();
  ~NoTapeScope();
  NoTapeScope(const NoTapeScope&) = delete;
  NoTapeScope& operator=(const NoTapeScope&) = delete;

 private:
  Tape* previous_;
};

}  // namespace dman
