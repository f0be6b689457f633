#include <doctest.h>

#include <cmath>
#include <tuple>

#include "wits/nn/kernels.hpp"
#include "wits/nn/reference.hpp"
#include "wits/nn/spec.hpp"
#include "wits/rng.hpp"

using namespace wits;
using namespace wits::nn;

namespace {

TensorF random_tensor(std::vector<int> shape, uint64_t seed, double lo = -1.0,
                      double hi = 1.0) {
  TensorF t(std::move(shape));
  StreamRng rng(seed);
  for (auto& v : t.data) v = static_cast<float>(rng.uniform(lo, hi));
  return t;
}

// Runs the batched kernel on a single sample and compares with the naive
// serial reference.
void check_conv_against_reference(int h, int w, int cin, int k, int m, int stride,
                                  int pad, uint64_t seed) {
  TensorF in = random_tensor({1, h, w, cin}, seed);
  TensorF weights = random_tensor({m, k, k, cin}, seed + 1);
  TensorF bias = random_tensor({m}, seed + 2);

  TensorF out, patches;
  kernels::conv2d_forward(in, weights, bias, stride, pad, out, patches);

  TensorF single = in;
  single.shape = {h, w, cin};
  TensorF expect = reference::conv2d_forward(single, weights, bias, stride, pad);

  REQUIRE(out.size() == expect.size());
  for (int64_t i = 0; i < out.size(); ++i) {
    CHECK(std::abs(out.data[i] - expect.data[i]) < 1e-6f);
  }
}

}  // namespace

TEST_CASE("conv2d 1x1 identity kernel") {
  TensorF in = random_tensor({1, 4, 4, 1}, 9);
  TensorF weights({1, 1, 1, 1});
  weights.data[0] = 1.0f;
  TensorF bias({1});

  TensorF out, patches;
  kernels::conv2d_forward(in, weights, bias, 1, 0, out, patches);
  CHECK(out.data == in.data);
}

TEST_CASE("conv2d zero input yields bias everywhere") {
  TensorF in({2, 5, 5, 3});
  TensorF weights = random_tensor({4, 3, 3, 3}, 3);
  TensorF bias({4});
  bias.data = {0.5f, -1.0f, 2.0f, 0.0f};

  TensorF out, patches;
  kernels::conv2d_forward(in, weights, bias, 1, 1, out, patches);
  for (int n = 0; n < 2; ++n)
    for (int p = 0; p < 25; ++p)
      for (int c = 0; c < 4; ++c)
        CHECK(out.data[(static_cast<size_t>(n) * 25 + p) * 4 + c] == bias.data[c]);
}

TEST_CASE("conv2d matches naive reference on a 5x5x3 input") {
  check_conv_against_reference(5, 5, 3, 3, 4, 1, 0, 101);
}

TEST_CASE("conv2d matches reference across strides, pads and shapes") {
  uint64_t seed = 500;
  for (int stride : {1, 2, 4}) {
    for (int pad : {0, 1, 2}) {
      for (auto [h, w, cin, k, m] : {std::tuple{7, 9, 3, 3, 5},
                                     std::tuple{12, 12, 6, 5, 8},
                                     std::tuple{9, 6, 2, 1, 3}}) {
        if (h + 2 * pad < k) continue;
        check_conv_against_reference(h, w, cin, k, m, stride, pad, seed++);
      }
    }
  }
}

TEST_CASE("conv2d rejects bad geometry") {
  TensorF in({1, 4, 4, 3});
  TensorF weights({2, 3, 3, 5});  // channel mismatch
  TensorF bias({2});
  TensorF out, patches;
  CHECK_THROWS_AS(kernels::conv2d_forward(in, weights, bias, 1, 0, out, patches),
                  DataError);

  TensorF w2({2, 9, 9, 3});  // kernel larger than padded input
  TensorF b2({2});
  CHECK_THROWS_AS(kernels::conv2d_forward(in, w2, b2, 1, 0, out, patches), DataError);
}

TEST_CASE("maxpool on 1..16 grid, window 3 stride 1") {
  TensorF in({1, 4, 4, 1});
  for (int i = 0; i < 16; ++i) in.data[i] = static_cast<float>(i + 1);
  TensorF out;
  std::vector<int32_t> argmax;
  kernels::maxpool_forward(in, 3, 1, out, argmax);
  CHECK(out.shape == std::vector<int>{1, 2, 2, 1});
  CHECK(out.data == std::vector<float>{11, 12, 15, 16});
}

TEST_CASE("maxpool constant input stays constant and matches reference") {
  TensorF in({1, 6, 6, 2});
  in.fill(3.5f);
  TensorF out;
  std::vector<int32_t> argmax;
  kernels::maxpool_forward(in, 3, 2, out, argmax);
  for (float v : out.data) CHECK(v == 3.5f);

  TensorF rnd = random_tensor({1, 8, 7, 3}, 42);
  kernels::maxpool_forward(rnd, 3, 2, out, argmax);
  TensorF single = rnd;
  single.shape = {8, 7, 3};
  TensorF expect = reference::maxpool_forward(single, 3, 2);
  CHECK(out.data == expect.data);
}

TEST_CASE("maxpool gradient routes only to the first argmax") {
  // Two equal maxima in one window: the first in row-major order wins.
  TensorF in({1, 2, 2, 1});
  in.data = {7.0f, 7.0f, 1.0f, 0.0f};
  TensorF out;
  std::vector<int32_t> argmax;
  kernels::maxpool_forward(in, 2, 1, out, argmax);
  REQUIRE(out.data.size() == 1);
  CHECK(out.data[0] == 7.0f);
  CHECK(argmax[0] == 0);

  TensorF dout({1, 1, 1, 1});
  dout.data[0] = 1.0f;
  TensorF din;
  kernels::maxpool_backward(dout, argmax, Shape3{2, 2, 1}, din);
  CHECK(din.data == std::vector<float>{1.0f, 0.0f, 0.0f, 0.0f});
}

TEST_CASE("lrn special cases") {
  SUBCASE("alpha 0 scales by k^-beta") {
    TensorF in = random_tensor({1, 3, 3, 4}, 5);
    TensorF out;
    kernels::lrn_forward(in, 5, 2.0, 0.0, 0.75, out);
    const float scale = static_cast<float>(std::pow(2.0, -0.75));
    for (int64_t i = 0; i < in.size(); ++i) {
      CHECK(out.data[i] == doctest::Approx(in.data[i] * scale).epsilon(1e-6));
    }
  }
  SUBCASE("zero input stays zero") {
    TensorF in({1, 1, 1, 1});
    TensorF out;
    kernels::lrn_forward(in, 1, 2.0, 1.0, 0.75, out);
    CHECK(out.data[0] == 0.0f);
  }
  SUBCASE("matches scalar reference") {
    TensorF in = random_tensor({1, 4, 5, 8}, 77);
    TensorF out;
    kernels::lrn_forward(in, 5, 2.0, 1e-4, 0.75, out);
    TensorF single = in;
    single.shape = {4, 5, 8};
    TensorF expect = reference::lrn_forward(single, 5, 2.0, 1e-4, 0.75);
    for (int64_t i = 0; i < out.size(); ++i) {
      CHECK(std::abs(out.data[i] - expect.data[i]) < 1e-6f);
    }
  }
}

TEST_CASE("relu clamps negatives") {
  TensorF in({1, 1, 1, 4});
  in.data = {-2.0f, -0.1f, 0.0f, 3.5f};
  TensorF out;
  kernels::relu_forward(in, out);
  CHECK(out.data == std::vector<float>{0.0f, 0.0f, 0.0f, 3.5f});

  TensorF dout({1, 1, 1, 4});
  dout.fill(1.0f);
  TensorF din;
  kernels::relu_backward(dout, in, din);
  CHECK(din.data == std::vector<float>{0.0f, 0.0f, 0.0f, 1.0f});
}

TEST_CASE("dropout") {
  TensorF in = random_tensor({1, 1, 1, 64}, 11, 0.5, 1.5);

  SUBCASE("rate 0 is the identity") {
    TensorF out;
    kernels::dropout_forward(in, 0.0, 123, out);
    CHECK(out.data == in.data);
  }

  SUBCASE("train-mode mean is close to the input mean") {
    // Monte-Carlo over 1e5 independent masks of a single unit.
    const double rate = 0.4;
    TensorF unit({1, 1, 1, 1});
    unit.data[0] = 1.0f;
    double sum = 0.0;
    const int trials = 100000;
    for (int t = 0; t < trials; ++t) {
      TensorF out;
      kernels::dropout_forward(unit, rate, stream_key(9, "mc", t), out);
      sum += out.data[0];
    }
    CHECK(sum / trials == doctest::Approx(1.0).epsilon(0.02));
  }

  SUBCASE("backward uses the same mask as forward") {
    TensorF out;
    kernels::dropout_forward(in, 0.5, 321, out);
    TensorF ones(in.shape);
    ones.fill(1.0f);
    TensorF din;
    kernels::dropout_backward(ones, 0.5, 321, din);
    for (int64_t i = 0; i < in.size(); ++i) {
      bool kept_fwd = out.data[i] != 0.0f;
      bool kept_bwd = din.data[i] != 0.0f;
      CHECK(kept_fwd == kept_bwd);
    }
  }
}

TEST_CASE("softmax cross entropy") {
  SUBCASE("equal logits give uniform probabilities and ln 2 loss") {
    TensorF logits({1, 2});
    logits.data = {0.7f, 0.7f};
    TensorF probs;
    float loss = kernels::softmax_xent_forward(logits, {1}, probs);
    CHECK(probs.data[0] == doctest::Approx(0.5));
    CHECK(probs.data[1] == doctest::Approx(0.5));
    CHECK(loss == doctest::Approx(std::log(2.0)));
  }

  SUBCASE("huge logits do not overflow") {
    TensorF logits({1, 2});
    logits.data = {1000.0f, 0.0f};
    TensorF probs;
    float loss = kernels::softmax_xent_forward(logits, {0}, probs);
    CHECK(std::isfinite(loss));
    CHECK(probs.data[0] == doctest::Approx(1.0));
    CHECK(probs.data[1] == doctest::Approx(0.0));
  }

  SUBCASE("probabilities sum to one") {
    TensorF logits = random_tensor({16, 2}, 5, -4.0, 4.0);
    TensorF probs;
    kernels::softmax_xent_forward(logits, {}, probs);
    for (int s = 0; s < 16; ++s) {
      CHECK(probs.data[2 * s] + probs.data[2 * s + 1] ==
            doctest::Approx(1.0).epsilon(1e-6));
      CHECK(probs.data[2 * s] >= 0.0f);
      CHECK(probs.data[2 * s] <= 1.0f);
    }
  }

  SUBCASE("gradient matches central finite differences") {
    // 64-bit to keep the finite-difference noise down.
    TensorD logits({3, 2});
    StreamRng rng(31);
    for (auto& v : logits.data) v = rng.uniform(-2.0, 2.0);
    std::vector<int> labels = {0, 1, 1};

    TensorD probs, dlogits;
    kernels::softmax_xent_forward(logits, labels, probs);
    kernels::softmax_xent_backward(probs, labels, dlogits);

    const double h = 1e-6;
    for (int64_t i = 0; i < logits.size(); ++i) {
      TensorD p;
      logits.data[i] += h;
      double lp = kernels::softmax_xent_forward(logits, labels, p);
      logits.data[i] -= 2 * h;
      double lm = kernels::softmax_xent_forward(logits, labels, p);
      logits.data[i] += h;
      double fd = (lp - lm) / (2 * h);
      CHECK(std::abs(fd - dlogits.data[i]) / std::max(1e-8, std::abs(fd)) < 1e-4);
    }
  }
}

TEST_CASE("network spec shape inference and parameter count") {
  auto tiny = NetworkSpec::tiny(64, 3);
  auto shapes = tiny.infer_shapes();
  CHECK(shapes.front() == Shape3{32, 32, 16});
  CHECK(shapes.back() == Shape3{1, 1, 2});

  // Independent closed-form counter.
  // conv(16,5x5x3)+16, conv(32,3x3x16)+32, dense(128 x 7*7*32)+128, dense(2x128)+2
  int64_t expect = (16 * 5 * 5 * 3 + 16) + (32 * 3 * 3 * 16 + 32) +
                   (128 * 7 * 7 * 32 + 128) + (2 * 128 + 2);
  CHECK(tiny.param_count() == expect);

  auto alex = NetworkSpec::alexnet(64, 3);
  CHECK_NOTHROW(alex.infer_shapes());
  CHECK(alex.param_count() > 0);

  SUBCASE("spec json round trip") {
    auto back = NetworkSpec::from_json(tiny.to_json());
    CHECK(back.to_json() == tiny.to_json());
  }

  SUBCASE("invalid stacks are rejected") {
    NetworkSpec bad = tiny;
    bad.layers.pop_back();  // no softmax head
    CHECK_THROWS_AS(bad.infer_shapes(), DataError);

    NetworkSpec tiny8 = NetworkSpec::tiny(8, 3);  // pool window exceeds input
    CHECK_THROWS_AS(tiny8.infer_shapes(), DataError);
  }
}
