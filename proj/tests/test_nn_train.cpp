#include <doctest.h>

#include <cmath>
#include <filesystem>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "wits/nn/train.hpp"
#include "wits/rng.hpp"
#include "wits/synthetic.hpp"

using namespace wits;
using namespace wits::nn;

namespace {

// Small, quickly separable dataset rendered straight into cubes: class 0 is
// a horizontal grating, class 1 a vertical one.
TrainDataset grating_dataset(int n, int size, uint64_t seed) {
  TrainDataset data;
  StreamRng rng(seed);
  for (int i = 0; i < n; ++i) {
    int label = i % 2;
    ImageCube cube(size, size, 3);
    double phase = rng.uniform(0.0, 6.28);
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        double t = label == 0 ? y : x;
        double v = 0.5 + 0.35 * std::sin(2.0 * 3.14159 * 4.0 * t / size + phase) +
                   0.02 * rng.uniform(-1.0, 1.0);
        for (int c = 0; c < 3; ++c) {
          cube.at(y, x, c) = static_cast<float>(v);
        }
      }
    }
    data.cubes.push_back(std::move(cube));
    data.labels.push_back(label);
  }
  return data;
}

NetworkSpec micro_spec(int size) {
  NetworkSpec spec;
  spec.input = {size, size, 3};
  spec.layers = {
      LayerSpec::conv(8, 5, 2, 2), LayerSpec::relu(),
      LayerSpec::maxpool(3, 2),
      LayerSpec::dense(32),        LayerSpec::relu(),
      LayerSpec::dense(2),         LayerSpec::softmax_xent(),
  };
  return spec;
}

}  // namespace

TEST_CASE("zero iterations returns the initial parameters unchanged") {
  auto spec = micro_spec(16);
  auto data = grating_dataset(8, 16, 3);
  TrainConfig cfg;
  cfg.iterations = 0;
  cfg.batch_size = 4;
  cfg.seed = 5;
  auto result = train(spec, cfg, data);

  Network<float> net(spec);
  auto fresh = net.init_params(stream_key(cfg.seed, "init"));
  CHECK(result.params == fresh);
}

TEST_CASE("identical seeds give bit-identical parameters") {
  auto spec = micro_spec(16);
  auto data = grating_dataset(24, 16, 7);
  TrainConfig cfg;
  cfg.iterations = 12;
  cfg.batch_size = 8;
  cfg.seed = 99;
  cfg.log_interval = 0;

  auto r1 = train(spec, cfg, data);
  auto r2 = train(spec, cfg, data);
  CHECK(r1.params == r2.params);
  CHECK(r1.channel_means == r2.channel_means);

  cfg.seed = 100;
  auto r3 = train(spec, cfg, data);
  CHECK(r1.params != r3.params);
}

#ifdef _OPENMP
TEST_CASE("training trajectory is independent of the worker count") {
  auto spec = micro_spec(16);
  auto data = grating_dataset(24, 16, 7);
  TrainConfig cfg;
  cfg.iterations = 8;
  cfg.batch_size = 8;
  cfg.seed = 1234;
  cfg.log_interval = 0;

  int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  auto serial = train(spec, cfg, data);
  omp_set_num_threads(4);
  auto parallel = train(spec, cfg, data);
  omp_set_num_threads(saved);

  CHECK(serial.params == parallel.params);
}
#endif

TEST_CASE("training a micro net separates a separable dataset") {
  auto spec = micro_spec(16);
  auto data = grating_dataset(120, 16, 21);
  TrainConfig cfg;
  cfg.iterations = 150;
  cfg.batch_size = 16;
  cfg.learning_rate = 0.05;
  cfg.seed = 3;
  cfg.log_interval = 0;

  auto result = train(spec, cfg, data);
  auto probs = predict(spec, result.params, result.channel_means, data.cubes);
  CHECK(accuracy_of(probs, data.labels) >= 0.95);
}

TEST_CASE("diverging training aborts with a numeric error") {
  auto spec = micro_spec(16);
  auto data = grating_dataset(16, 16, 5);
  TrainConfig cfg;
  cfg.iterations = 200;
  cfg.batch_size = 8;
  cfg.learning_rate = 1e6;  // guaranteed blow-up
  cfg.log_interval = 0;
  CHECK_THROWS_AS(train(spec, cfg, data), NumericError);
}

TEST_CASE("prediction is invariant to batch partitioning") {
  auto spec = micro_spec(16);
  auto data = grating_dataset(30, 16, 11);
  TrainConfig cfg;
  cfg.iterations = 5;
  cfg.batch_size = 8;
  cfg.log_interval = 0;
  auto result = train(spec, cfg, data);

  auto p1 = predict(spec, result.params, result.channel_means, data.cubes, 7);
  auto p2 = predict(spec, result.params, result.channel_means, data.cubes, 30);
  CHECK(p1.data == p2.data);

  // probabilities sum to 1 within 1e-6 even for untrained nets
  Network<float> net(spec);
  auto fresh = net.init_params(1);
  auto p3 = predict(spec, fresh, {}, data.cubes);
  for (size_t s = 0; s < data.cubes.size(); ++s) {
    double sum = p3.data[2 * s] + p3.data[2 * s + 1];
    CHECK(std::abs(sum - 1.0) < 1e-6);
    CHECK(std::isfinite(static_cast<double>(p3.data[2 * s])));
  }
}

TEST_CASE("checkpoint round trip is lossless") {
  auto spec = micro_spec(16);
  auto data = grating_dataset(8, 16, 13);
  TrainConfig cfg;
  cfg.iterations = 3;
  cfg.batch_size = 4;
  cfg.log_interval = 0;
  auto result = train(spec, cfg, data);

  auto dir = std::filesystem::temp_directory_path() / "wits_ckpt";
  std::filesystem::create_directories(dir);
  std::string path = (dir / "model.wnet").string();
  save_checkpoint(path, spec, result.params, result.channel_means, 3,
                  &result.momentum);

  auto ckpt = load_checkpoint(path);
  CHECK(ckpt.params == result.params);
  CHECK(ckpt.momentum == result.momentum);
  CHECK(ckpt.channel_means == result.channel_means);
  CHECK(ckpt.iteration == 3);
  CHECK(ckpt.spec.to_json() == spec.to_json());
}

TEST_CASE("gradient check on a linear-only network is exact") {
  NetworkSpec spec;
  spec.input = {4, 4, 2};
  spec.layers = {LayerSpec::dense(8), LayerSpec::dense(2), LayerSpec::softmax_xent()};
  auto report = gradient_check(spec, 17, 2, 1e-3, 1e-4);
  CHECK(report.params_checked == (8 * 32 + 8) + (2 * 8 + 2));
  CHECK(report.max_rel_error < 1e-8);
}

TEST_CASE("gradient check covers every layer kind") {
  NetworkSpec spec;
  spec.input = {8, 8, 3};
  spec.layers = {
      LayerSpec::conv(4, 3, 1, 1), LayerSpec::relu(),
      LayerSpec::lrn(3, 2.0, 1e-2, 0.75),
      LayerSpec::maxpool(2, 2),
      LayerSpec::dense(16),        LayerSpec::relu(),  LayerSpec::dropout(0.5),
      LayerSpec::dense(2),         LayerSpec::softmax_xent(),
  };
  auto report = gradient_check(spec, 23, 2, 1e-3, 1e-4);
  CHECK(report.failures.empty());
  CHECK(report.max_rel_error < 1e-4);
}
