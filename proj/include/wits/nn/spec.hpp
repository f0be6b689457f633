#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wits::nn {

enum class LayerKind { Conv, ReLU, MaxPool, Lrn, Dense, Dropout, SoftmaxXent };

struct LayerSpec {
  LayerKind kind = LayerKind::ReLU;

  // Conv
  int out_channels = 0;
  int kernel = 0;
  int pad = 0;
  // Conv and MaxPool
  int stride = 1;
  // MaxPool
  int window = 0;
  // Lrn: out = in / (k + (alpha/n) * sum over n adjacent channels of in^2)^beta
  int lrn_n = 5;
  double lrn_k = 2.0;
  double lrn_alpha = 1e-4;
  double lrn_beta = 0.75;
  // Dense
  int units = 0;
  // Dropout (inverted: survivors scaled by 1/(1-rate) at train time)
  double rate = 0.5;

  static LayerSpec conv(int out_channels, int kernel, int stride, int pad);
  static LayerSpec relu();
  static LayerSpec maxpool(int window, int stride);
  static LayerSpec lrn(int n = 5, double k = 2.0, double alpha = 1e-4,
                       double beta = 0.75);
  static LayerSpec dense(int units);
  static LayerSpec dropout(double rate);
  static LayerSpec softmax_xent();
};

struct Shape3 {
  int h = 0;
  int w = 0;
  int c = 0;
  int64_t count() const { return static_cast<int64_t>(h) * w * c; }
  bool operator==(const Shape3&) const = default;
};

struct NetworkSpec {
  Shape3 input;  // H, W, 3k
  std::vector<LayerSpec> layers;
  int classes = 2;

  // Per-layer output shapes. Throws DataError on incompatible adjacent
  // layers, non-positive spatial extents, or a head that is not a 2-unit
  // softmax.
  std::vector<Shape3> infer_shapes() const;

  // Closed-form learnable parameter count (weights + biases).
  int64_t param_count() const;

  std::string to_json() const;
  static NetworkSpec from_json(const std::string& text);

  // AlexNet-derived stack with the 1000-way head replaced by 2 units.
  static NetworkSpec alexnet(int input_size, int input_channels);
  // Two conv blocks (16/32 channels) + dense 128; sized for CPU runs.
  static NetworkSpec tiny(int input_size, int input_channels);
};

}  // namespace wits::nn
