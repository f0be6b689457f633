#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wits/nn/spec.hpp"
#include "wits/tensor.hpp"

namespace wits::nn {

template <typename T>
struct LayerParams {
  TensorT<T> w;
  TensorT<T> b;
  bool has_params() const { return !w.empty(); }
  bool operator==(const LayerParams&) const = default;
};

// Per-layer weight and bias tensors (slots for parameterless layers stay
// empty so indices line up with the spec).
template <typename T>
struct ParamStore {
  std::vector<LayerParams<T>> layers;

  int64_t param_count() const {
    int64_t n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
  }

  template <typename U>
  ParamStore<U> cast() const {
    ParamStore<U> out;
    out.layers.reserve(layers.size());
    for (const auto& l : layers) {
      out.layers.push_back({l.w.template cast<U>(), l.b.template cast<U>()});
    }
    return out;
  }

  // Flat scalar view in (layer, weights-then-bias) order; used by the
  // finite-difference checker.
  T& scalar(int64_t index);

  bool operator==(const ParamStore&) const = default;
};

enum class RunMode {
  Train,      // dropout active, keyed by the caller's dropout seed
  Eval,       // dropout is identity
  FixedMask,  // dropout active with a constant mask (gradient checking)
};

template <typename T>
class Network {
 public:
  explicit Network(NetworkSpec spec);

  const NetworkSpec& spec() const { return spec_; }
  const std::vector<Shape3>& shapes() const { return shapes_; }

  // Gaussian(0, 0.01) weights, zero biases.
  ParamStore<T> init_params(uint64_t seed) const;
  // Fan-in-scaled init with small positive biases; better conditioned
  // activations for finite-difference work.
  ParamStore<T> init_params_scaled(uint64_t seed) const;

  struct Workspace {
    TensorT<T> input;
    std::vector<TensorT<T>> acts;
    std::vector<TensorT<T>> patches;
    std::vector<std::vector<int32_t>> argmax;
    TensorT<T> probs;
  };

  // Runs the batch [N,H,W,C] through the stack. Returns the mean loss when
  // labels are provided (they are required in Train mode), 0 otherwise.
  T forward(const ParamStore<T>& params, const TensorT<T>& input,
            const std::vector<int>& labels, RunMode mode, uint64_t dropout_seed,
            Workspace& ws) const;

  // Backpropagation through the workspace of the preceding forward call.
  void backward(const ParamStore<T>& params, const std::vector<int>& labels,
                RunMode mode, uint64_t dropout_seed, Workspace& ws,
                ParamStore<T>& grads) const;

  // Eval-mode class probabilities for a batch.
  TensorT<T> predict(const ParamStore<T>& params, const TensorT<T>& input) const;

 private:
  NetworkSpec spec_;
  std::vector<Shape3> shapes_;
};

// "WNET" checkpoint: magic, version, JSON header (spec, channel means,
// iteration, momentum flag), then per-layer raw little-endian float32
// weights in spec order (biases follow their weights; momentum blocks
// trail when present).
struct Checkpoint {
  NetworkSpec spec;
  ParamStore<float> params;
  ParamStore<float> momentum;  // empty unless has_momentum
  std::vector<float> channel_means;
  int64_t iteration = 0;
  bool has_momentum = false;
};

void save_checkpoint(const std::string& path, const NetworkSpec& spec,
                     const ParamStore<float>& params,
                     const std::vector<float>& channel_means, int64_t iteration,
                     const ParamStore<float>* momentum = nullptr);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace wits::nn
