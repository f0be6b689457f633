#include "wits/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "wits/errors.hpp"
#include "wits/rng.hpp"

namespace wits::nn {

namespace {

void check_data(const NetworkSpec& spec, const TrainDataset& data) {
  if (data.cubes.empty()) throw DataError("training data is empty");
  if (data.cubes.size() != data.labels.size()) {
    throw DataError("cube/label count mismatch");
  }
  for (const auto& cube : data.cubes) {
    if (cube.height != spec.input.h || cube.width != spec.input.w ||
        cube.channels != spec.input.c) {
      throw DataError("cube shape does not match network input");
    }
  }
  for (int l : data.labels) {
    if (l < 0 || l >= spec.classes) throw DataError("label out of range");
  }
}

std::vector<float> compute_channel_means(const TrainDataset& data, int channels) {
  std::vector<double> acc(channels, 0.0);
  int64_t pixels = 0;
  for (const auto& cube : data.cubes) {
    const int64_t hw = static_cast<int64_t>(cube.height) * cube.width;
    for (int64_t p = 0; p < hw; ++p) {
      const float* px = cube.data.data() + p * channels;
      for (int c = 0; c < channels; ++c) acc[c] += px[c];
    }
    pixels += hw;
  }
  std::vector<float> means(channels);
  for (int c = 0; c < channels; ++c) {
    means[c] = static_cast<float>(acc[c] / static_cast<double>(pixels));
  }
  return means;
}

// Copies cubes into the batch tensor, subtracting per-channel means.
void fill_batch(const std::vector<ImageCube>& cubes, const std::vector<size_t>& idx,
                const std::vector<float>& means, TensorF& batch) {
  const int n = static_cast<int>(idx.size());
  const int64_t per_sample = batch.size() / n;
  const int channels = static_cast<int>(means.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int s = 0; s < n; ++s) {
    const ImageCube& cube = cubes[idx[s]];
    float* dst = batch.ptr() + static_cast<size_t>(s) * per_sample;
    for (int64_t i = 0; i < per_sample; ++i) {
      dst[i] = cube.data[i] - means[i % channels];
    }
  }
}

}  // namespace

TrainResult train(const NetworkSpec& spec, const TrainConfig& config,
                  const TrainDataset& data, const TrainLogger& logger) {
  if (config.batch_size < 1) throw DataError("batch size must be >= 1");
  if (config.learning_rate <= 0.0) throw DataError("learning rate must be positive");
  check_data(spec, data);

  Network<float> net(spec);
  TrainResult result;
  result.channel_means = compute_channel_means(data, spec.input.c);
  result.params = net.init_params(stream_key(config.seed, "init"));
  result.momentum = result.params;
  for (auto& l : result.momentum.layers) {
    l.w.fill(0.0f);
    l.b.fill(0.0f);
  }
  if (config.iterations <= 0) return result;

  const size_t n = data.cubes.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  uint64_t epoch = 0;
  StreamRng(stream_key(config.seed, "order", epoch)).shuffle(order);
  size_t cursor = 0;

  const int b = config.batch_size;
  TensorF batch({b, spec.input.h, spec.input.w, spec.input.c});
  std::vector<size_t> batch_idx(b);
  std::vector<int> batch_labels(b);
  typename Network<float>::Workspace ws;
  ParamStore<float> grads;

  for (int iter = 0; iter < config.iterations; ++iter) {
    for (int s = 0; s < b; ++s) {
      if (cursor == n) {
        cursor = 0;
        ++epoch;
        StreamRng(stream_key(config.seed, "order", epoch)).shuffle(order);
      }
      batch_idx[s] = order[cursor++];
      batch_labels[s] = data.labels[batch_idx[s]];
    }
    fill_batch(data.cubes, batch_idx, result.channel_means, batch);

    uint64_t iter_seed = stream_key(config.seed, "iter", static_cast<uint64_t>(iter));
    float loss = net.forward(result.params, batch, batch_labels, RunMode::Train,
                             iter_seed, ws);
    if (!std::isfinite(loss)) {
      throw NumericError("training diverged: loss is not finite at iteration " +
                         std::to_string(iter) +
                         " (reduce the learning rate or check the data)");
    }
    net.backward(result.params, batch_labels, RunMode::Train, iter_seed, ws, grads);

    const double lr = config.learning_rate *
                      std::pow(config.lr_decay, iter / std::max(config.lr_step, 1));
    for (size_t li = 0; li < result.params.layers.size(); ++li) {
      auto& p = result.params.layers[li];
      if (!p.has_params()) continue;
      auto& v = result.momentum.layers[li];
      auto& g = grads.layers[li];
      const float flr = static_cast<float>(lr);
      const float mu = static_cast<float>(config.momentum);
      const float wd = static_cast<float>(config.weight_decay);
      float* w = p.w.ptr();
      float* vw = v.w.ptr();
      const float* gw = g.w.ptr();
      const int64_t nw = p.w.size();
      for (int64_t i = 0; i < nw; ++i) {
        vw[i] = mu * vw[i] - flr * (gw[i] + wd * w[i]);
        w[i] += vw[i];
      }
      float* bias = p.b.ptr();
      float* vb = v.b.ptr();
      const float* gb = g.b.ptr();
      const int64_t nb = p.b.size();
      for (int64_t i = 0; i < nb; ++i) {
        vb[i] = mu * vb[i] - flr * gb[i];  // no decay on biases
        bias[i] += vb[i];
      }
    }

    double batch_acc = accuracy_of(ws.probs, batch_labels);
    if ((config.log_interval > 0 &&
         (iter % config.log_interval == 0 || iter + 1 == config.iterations)) ||
        iter + 1 == config.iterations) {
      TraceEntry entry{iter, static_cast<double>(loss), batch_acc, lr};
      result.trace.push_back(entry);
      if (logger) logger(entry);
    }

    if (config.checkpoint_interval > 0 && !config.checkpoint_dir.empty() &&
        (iter + 1) % config.checkpoint_interval == 0) {
      save_checkpoint(config.checkpoint_dir + "/checkpoint_" +
                          std::to_string(iter + 1) + ".wnet",
                      spec, result.params, result.channel_means, iter + 1,
                      &result.momentum);
    }
  }
  return result;
}

TensorF predict(const NetworkSpec& spec, const ParamStore<float>& params,
                const std::vector<float>& channel_means,
                const std::vector<ImageCube>& cubes, int batch_size) {
  if (cubes.empty()) return TensorF();
  Network<float> net(spec);
  const int n = static_cast<int>(cubes.size());
  TensorF all({n, spec.classes});

  std::vector<float> means = channel_means;
  if (means.empty()) means.assign(spec.input.c, 0.0f);

  for (int start = 0; start < n; start += batch_size) {
    const int count = std::min(batch_size, n - start);
    TensorF batch({count, spec.input.h, spec.input.w, spec.input.c});
    std::vector<size_t> idx(count);
    std::iota(idx.begin(), idx.end(), static_cast<size_t>(start));
    fill_batch(cubes, idx, means, batch);
    TensorF probs = net.predict(params, batch);
    std::copy(probs.data.begin(), probs.data.end(),
              all.data.begin() + static_cast<size_t>(start) * spec.classes);
  }
  return all;
}

double accuracy_of(const TensorF& probs, const std::vector<int>& labels) {
  if (labels.empty()) throw DataError("accuracy_of: empty labels");
  const int n = static_cast<int>(labels.size());
  const int c = static_cast<int>(probs.size() / n);
  int correct = 0;
  for (int s = 0; s < n; ++s) {
    const float* p = probs.ptr() + static_cast<size_t>(s) * c;
    int arg = 0;
    for (int j = 1; j < c; ++j) {
      if (p[j] > p[arg]) arg = j;
    }
    if (arg == labels[s]) ++correct;
  }
  return static_cast<double>(correct) / n;
}

namespace {

// Any exact zero at a ReLU input makes the analytic gradient ambiguous;
// shift the network input slightly and retry.
bool has_exact_relu_zero(const NetworkSpec& spec,
                         const Network<double>::Workspace& ws) {
  for (size_t i = 1; i < spec.layers.size(); ++i) {
    if (spec.layers[i].kind != LayerKind::ReLU) continue;
    for (double v : ws.acts[i - 1].data) {
      if (v == 0.0) return true;
    }
  }
  return false;
}

}  // namespace

GradCheckReport gradient_check(const NetworkSpec& spec, uint64_t seed, int batch,
                               double step, double tolerance) {
  Network<double> net(spec);
  ParamStore<double> params = net.init_params_scaled(stream_key(seed, "gc_params"));

  TensorD input({batch, spec.input.h, spec.input.w, spec.input.c});
  std::vector<int> labels(batch);
  StreamRng rng(stream_key(seed, "gc_input"));
  for (auto& v : input.data) v = rng.uniform(-0.5, 0.5);
  for (int s = 0; s < batch; ++s) {
    labels[s] = static_cast<int>(rng.bounded(static_cast<uint64_t>(spec.classes)));
  }

  const uint64_t mask_seed = stream_key(seed, "gc_mask");
  typename Network<double>::Workspace ws;

  // Nudge the input until no ReLU sits exactly on its kink.
  for (int attempt = 0; attempt < 8; ++attempt) {
    net.forward(params, input, labels, RunMode::FixedMask, mask_seed, ws);
    if (!has_exact_relu_zero(spec, ws)) break;
    for (auto& v : input.data) v += 3.0 * step;
  }

  ParamStore<double> grads;
  net.forward(params, input, labels, RunMode::FixedMask, mask_seed, ws);
  net.backward(params, labels, RunMode::FixedMask, mask_seed, ws, grads);

  const int64_t total = params.param_count();
  std::vector<double> analytic(total);
  {
    int64_t i = 0;
    for (const auto& l : grads.layers) {
      for (double v : l.w.data) analytic[i++] = v;
      for (double v : l.b.data) analytic[i++] = v;
    }
  }

  GradCheckReport report;
  report.params_checked = total;
  std::vector<double> rel_errors(total, 0.0);
  std::vector<double> numeric(total, 0.0);

#ifdef _OPENMP
#pragma omp parallel
#endif
  {
    ParamStore<double> local = params;
    typename Network<double>::Workspace local_ws;
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
    for (int64_t i = 0; i < total; ++i) {
      auto probe = [&](double h) {
        double& p = local.scalar(i);
        const double saved = p;
        p = saved + h;
        double lp = net.forward(local, input, labels, RunMode::FixedMask, mask_seed,
                                local_ws);
        p = saved - h;
        double lm = net.forward(local, input, labels, RunMode::FixedMask, mask_seed,
                                local_ws);
        p = saved;
        return (lp - lm) / (2.0 * h);
      };
      auto rel = [&](double a, double n_) {
        double denom = std::max(std::abs(a), std::abs(n_));
        if (denom < 1e-8) return 0.0;  // both effectively zero
        return std::abs(a - n_) / denom;
      };
      double fd = probe(step);
      double err = rel(analytic[i], fd);
      // Kink/truncation artifacts shrink with the step; genuine gradient
      // bugs do not.
      for (double h : {step / 10.0, step / 100.0}) {
        if (err < tolerance) break;
        fd = probe(h);
        err = std::min(err, rel(analytic[i], fd));
      }
      numeric[i] = fd;
      rel_errors[i] = err;
    }
  }

  for (int64_t i = 0; i < total; ++i) {
    if (rel_errors[i] > report.max_rel_error) {
      report.max_rel_error = rel_errors[i];
      report.worst_param = i;
    }
    if (rel_errors[i] >= tolerance) {
      report.failures.push_back({i, analytic[i], numeric[i], rel_errors[i]});
    }
  }
  return report;
}

}  // namespace wits::nn
