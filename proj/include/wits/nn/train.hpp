#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wits/cube.hpp"
#include "wits/nn/network.hpp"
#include "wits/nn/spec.hpp"

namespace wits::nn {

struct TrainConfig {
  int batch_size = 256;
  int iterations = 10000;
  double learning_rate = 0.01;
  double lr_decay = 0.1;     // multiplied in at every step interval
  int lr_step = 100000;      // iterations per decay step
  double momentum = 0.9;
  double weight_decay = 5e-4;
  uint64_t seed = 1;

  int log_interval = 100;        // 0 disables the callback
  int checkpoint_interval = 0;   // 0 = no intermediate checkpoints
  std::string checkpoint_dir;
};

struct TrainDataset {
  std::vector<ImageCube> cubes;   // uniform dims, channels = 3k
  std::vector<int> labels;        // 0 = not interested, 1 = interested
};

struct TraceEntry {
  int iteration;
  double loss;
  double batch_accuracy;
  double learning_rate;
};

struct TrainResult {
  ParamStore<float> params;
  ParamStore<float> momentum;
  std::vector<float> channel_means;  // training-set mean per channel
  std::vector<TraceEntry> trace;
};

using TrainLogger = std::function<void(const TraceEntry&)>;

// Minibatch SGD with momentum, weight decay and step learning-rate decay.
// Deterministic for a fixed seed regardless of the OpenMP worker count.
// Throws NumericError if the loss stops being finite.
TrainResult train(const NetworkSpec& spec, const TrainConfig& config,
                  const TrainDataset& data, const TrainLogger& logger = {});

// Eval-mode class probabilities, batched internally; invariant to how the
// input list is partitioned into batches.
TensorF predict(const NetworkSpec& spec, const ParamStore<float>& params,
                const std::vector<float>& channel_means,
                const std::vector<ImageCube>& cubes, int batch_size = 64);

// Fraction of argmax predictions equal to the labels.
double accuracy_of(const TensorF& probs, const std::vector<int>& labels);

struct GradCheckFailure {
  int64_t param_index;
  double analytic;
  double numeric;
  double rel_error;
};

struct GradCheckReport {
  int64_t params_checked = 0;
  double max_rel_error = 0.0;
  int64_t worst_param = -1;
  std::vector<GradCheckFailure> failures;  // entries exceeding tolerance
  bool passed(double tolerance) const { return max_rel_error < tolerance; }
};

// Central finite differences over every parameter in 64-bit mode with a
// fixed dropout mask. Parameters failing at the base step are re-checked at
// smaller steps (kink artifacts shrink with the step, real gradient bugs
// do not). Inputs are nudged off exact ReLU zeros before checking.
GradCheckReport gradient_check(const NetworkSpec& spec, uint64_t seed,
                               int batch = 2, double step = 1e-3,
                               double tolerance = 1e-4);

}  // namespace wits::nn
