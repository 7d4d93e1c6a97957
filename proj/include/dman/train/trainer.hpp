#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "dman/model/dman.hpp"

namespace dman {

enum class RLMode { exact, sampled };

struct TrainConfig {
  std::size_t batch_size = 36;
  Real lr = 0.6;
  Real rho = 0.95;
  Real eps = 1e-8;
  std::size_t epochs = 10;
  // Steps between dev evaluations; 0 evaluates once per epoch.
  std::size_t eval_every = 0;
  RLMode rl_mode = RLMode::exact;
  std::size_t rl_samples = 1;
  bool rl_baseline = false;
  // Stop once training accuracy (measured at eval points) reaches this value.
  std::optional<double> stop_at_train_acc;
  bool track_train_acc = false;
  std::uint64_t seed = 1;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

struct LogRecord {
  std::size_t step = 0;
  std::size_t epoch = 0;
  double train_loss = 0;
  double ce = 0;
  double rl = 0;
  double dev_acc = 0;
  std::optional<double> train_acc;
  double keep_prob = 0;
  double lr = 0;

  nlohmann::json to_json() const;
};

struct TrainResult {
  DMANModel model;  // parameters of the best dev evaluation
  std::vector<LogRecord> log;
  double best_dev_acc = 0;
  std::size_t best_step = 0;
  std::size_t steps = 0;
  std::size_t clamped_probs = 0;
};

// One optimizer step worth of loss: returns {J, J_CE, J_RL} on the current tape.
struct BatchLoss {
  Tensor total;
  double ce = 0;
  double rl = 0;
  std::size_t clamped = 0;
};
BatchLoss batch_loss(const DMANModel& m, const std::vector<const NLIExample*>& batch, Real keep, Rng& dropout_rng,
                     Rng& sample_rng, const TrainConfig& cfg);

// Trains a copy of `initial`. Examples must be prepared for it. Throws
// DivergenceError on a non-finite loss.
TrainResult train_nli(const DMANModel& initial, const std::vector<NLIExample>& train, const std::vector<NLIExample>& dev,
                      const TrainConfig& cfg, const std::function<void(const LogRecord&)>& on_eval = {});

struct EvalResult {
  double accuracy = 0;
  std::size_t n = 0;
  std::array<std::array<std::size_t, kNumLabels>, kNumLabels> confusion{};  // [gold][predicted]

  nlohmann::json to_json() const;
};

std::size_t argmax_label(const std::vector<Real>& probs);
EvalResult evaluate(const DMANModel& m, const std::vector<NLIExample>& prepared);

// Averages the distributions of all models, then takes the argmax. Examples
// are prepared separately for each model. Throws ConfigError when the models
// do not share one architecture.
EvalResult ensemble_eval(const std::vector<DMANModel>& models, const std::vector<NLIExample>& raw,
                         const std::vector<TagRow>* sidecar = nullptr);

}  // namespace dman
