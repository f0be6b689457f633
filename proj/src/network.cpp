#include "wits/nn/network.hpp"

#include <json.hpp>

#include <cmath>
#include <cstring>
#include <fstream>

#include "wits/errors.hpp"
#include "wits/nn/kernels.hpp"
#include "wits/rng.hpp"

namespace wits::nn {

using json = nlohmann::ordered_json;

template <typename T>
T& ParamStore<T>::scalar(int64_t index) {
  for (auto& l : layers) {
    if (index < l.w.size()) return l.w.data[index];
    index -= l.w.size();
    if (index < l.b.size()) return l.b.data[index];
    index -= l.b.size();
  }
  throw DataError("parameter index out of range");
}

template <typename T>
Network<T>::Network(NetworkSpec spec) : spec_(std::move(spec)) {
  shapes_ = spec_.infer_shapes();
}

namespace {

template <typename T>
ParamStore<T> make_params(const NetworkSpec& spec, const std::vector<Shape3>& shapes,
                          uint64_t seed, bool scaled) {
  ParamStore<T> store;
  Shape3 cur = spec.input;
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    LayerParams<T> p;
    if (l.kind == LayerKind::Conv) {
      p.w = TensorT<T>({l.out_channels, l.kernel, l.kernel, cur.c});
      p.b = TensorT<T>({l.out_channels});
    } else if (l.kind == LayerKind::Dense) {
      p.w = TensorT<T>({l.units, static_cast<int>(cur.count())});
      p.b = TensorT<T>({l.units});
    }
    if (p.has_params()) {
      int64_t fan_in = p.w.size() / p.w.shape[0];
      double sigma = scaled ? std::sqrt(2.0 / static_cast<double>(fan_in)) : 0.01;
      StreamRng rng(stream_key(seed, "layer", static_cast<uint64_t>(i)));
      for (auto& v : p.w.data) v = static_cast<T>(sigma * rng.normal());
      if (scaled) p.b.fill(static_cast<T>(0.05));
    }
    store.layers.push_back(std::move(p));
    cur = shapes[i];
  }
  return store;
}

uint64_t layer_dropout_key(uint64_t dropout_seed, size_t layer_index) {
  return stream_key(dropout_seed, "dropout", static_cast<uint64_t>(layer_index));
}

}  // namespace

template <typename T>
ParamStore<T> Network<T>::init_params(uint64_t seed) const {
  return make_params<T>(spec_, shapes_, seed, false);
}

template <typename T>
ParamStore<T> Network<T>::init_params_scaled(uint64_t seed) const {
  return make_params<T>(spec_, shapes_, seed, true);
}

template <typename T>
T Network<T>::forward(const ParamStore<T>& params, const TensorT<T>& input,
                      const std::vector<int>& labels, RunMode mode,
                      uint64_t dropout_seed, Workspace& ws) const {
  if (input.shape.size() != 4 || input.shape[1] != spec_.input.h ||
      input.shape[2] != spec_.input.w || input.shape[3] != spec_.input.c) {
    throw DataError("network input shape mismatch");
  }
  if (mode == RunMode::Train && labels.empty()) {
    throw DataError("training forward requires labels");
  }

  const size_t L = spec_.layers.size();
  ws.input = input;
  ws.acts.assign(L, TensorT<T>());
  ws.patches.assign(L, TensorT<T>());
  ws.argmax.assign(L, {});

  const TensorT<T>* cur = &ws.input;
  T loss = T(0);
  for (size_t i = 0; i < L; ++i) {
    const LayerSpec& l = spec_.layers[i];
    switch (l.kind) {
      case LayerKind::Conv:
        kernels::conv2d_forward(*cur, params.layers[i].w, params.layers[i].b, l.stride,
                                l.pad, ws.acts[i], ws.patches[i]);
        break;
      case LayerKind::ReLU:
        kernels::relu_forward(*cur, ws.acts[i]);
        break;
      case LayerKind::MaxPool:
        kernels::maxpool_forward(*cur, l.window, l.stride, ws.acts[i], ws.argmax[i]);
        break;
      case LayerKind::Lrn:
        kernels::lrn_forward(*cur, l.lrn_n, l.lrn_k, l.lrn_alpha, l.lrn_beta,
                             ws.acts[i]);
        break;
      case LayerKind::Dense:
        kernels::dense_forward(*cur, params.layers[i].w, params.layers[i].b,
                               ws.acts[i]);
        break;
      case LayerKind::Dropout:
        if (mode == RunMode::Eval) {
          ws.acts[i] = *cur;
        } else {
          kernels::dropout_forward(*cur, l.rate, layer_dropout_key(dropout_seed, i),
                                   ws.acts[i]);
        }
        break;
      case LayerKind::SoftmaxXent:
        loss = kernels::softmax_xent_forward(*cur, labels, ws.probs);
        ws.acts[i] = ws.probs;
        break;
    }
    cur = &ws.acts[i];
  }
  return loss;
}

template <typename T>
void Network<T>::backward(const ParamStore<T>& params, const std::vector<int>& labels,
                          RunMode mode, uint64_t dropout_seed, Workspace& ws,
                          ParamStore<T>& grads) const {
  const size_t L = spec_.layers.size();
  if (ws.acts.size() != L) throw DataError("backward requires a forward workspace");
  if (labels.empty()) throw DataError("backward requires labels");

  grads.layers.assign(L, LayerParams<T>{});

  TensorT<T> delta;
  kernels::softmax_xent_backward(ws.probs, labels, delta);

  const int batch = ws.input.shape[0];

  // Iterate layers in reverse, skipping the softmax head (index L-1).
  for (int idx = static_cast<int>(L) - 2; idx >= 0; --idx) {
    const LayerSpec& l = spec_.layers[idx];
    const TensorT<T>& layer_in = idx == 0 ? ws.input : ws.acts[idx - 1];
    // Free reshape: delta always has the element count of this layer's
    // output; spatial kernels want the explicit NHWC extents.
    delta.shape = {batch, shapes_[idx].h, shapes_[idx].w, shapes_[idx].c};
    TensorT<T> next_delta;
    switch (l.kind) {
      case LayerKind::Conv: {
        Shape3 in_shape{layer_in.shape[1], layer_in.shape[2], layer_in.shape[3]};
        kernels::conv2d_backward(delta, params.layers[idx].w, ws.patches[idx],
                                 l.stride, l.pad, in_shape, next_delta,
                                 grads.layers[idx].w, grads.layers[idx].b);
        break;
      }
      case LayerKind::ReLU:
        kernels::relu_backward(delta, layer_in, next_delta);
        break;
      case LayerKind::MaxPool: {
        Shape3 in_shape{layer_in.shape[1], layer_in.shape[2], layer_in.shape[3]};
        kernels::maxpool_backward(delta, ws.argmax[idx], in_shape, next_delta);
        break;
      }
      case LayerKind::Lrn:
        kernels::lrn_backward(delta, layer_in, l.lrn_n, l.lrn_k, l.lrn_alpha,
                              l.lrn_beta, next_delta);
        break;
      case LayerKind::Dense:
        kernels::dense_backward(delta, layer_in, params.layers[idx].w, next_delta,
                                grads.layers[idx].w, grads.layers[idx].b);
        break;
      case LayerKind::Dropout:
        if (mode == RunMode::Eval) {
          next_delta = delta;
        } else {
          kernels::dropout_backward(delta, l.rate, layer_dropout_key(dropout_seed, idx),
                                    next_delta);
        }
        break;
      case LayerKind::SoftmaxXent:
        throw DataError("softmax must be the final layer");
    }
    next_delta.shape = layer_in.shape;
    delta = std::move(next_delta);
  }
}

template <typename T>
TensorT<T> Network<T>::predict(const ParamStore<T>& params,
                               const TensorT<T>& input) const {
  Workspace ws;
  forward(params, input, {}, RunMode::Eval, 0, ws);
  return ws.probs;
}

template struct ParamStore<float>;
template struct ParamStore<double>;
template class Network<float>;
template class Network<double>;

namespace {

constexpr char kMagic[4] = {'W', 'N', 'E', 'T'};
constexpr uint16_t kVersion = 1;

void write_tensor(std::ofstream& f, const TensorF& t) {
  f.write(reinterpret_cast<const char*>(t.ptr()),
          static_cast<std::streamsize>(t.data.size() * sizeof(float)));
}

void read_tensor(std::ifstream& f, TensorF& t) {
  f.read(reinterpret_cast<char*>(t.ptr()),
         static_cast<std::streamsize>(t.data.size() * sizeof(float)));
}

}  // namespace

void save_checkpoint(const std::string& path, const NetworkSpec& spec,
                     const ParamStore<float>& params,
                     const std::vector<float>& channel_means, int64_t iteration,
                     const ParamStore<float>* momentum) {
  json header;
  header["spec"] = json::parse(spec.to_json());
  header["channel_means"] = channel_means;
  header["iteration"] = iteration;
  header["has_momentum"] = momentum != nullptr;
  std::string header_text = header.dump();

  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open for writing: " + path);
  f.write(kMagic, 4);
  f.write(reinterpret_cast<const char*>(&kVersion), sizeof(kVersion));
  uint32_t len = static_cast<uint32_t>(header_text.size());
  f.write(reinterpret_cast<const char*>(&len), sizeof(len));
  f.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  for (const auto& l : params.layers) {
    write_tensor(f, l.w);
    write_tensor(f, l.b);
  }
  if (momentum != nullptr) {
    for (const auto& l : momentum->layers) {
      write_tensor(f, l.w);
      write_tensor(f, l.b);
    }
  }
  if (!f) throw DataError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open: " + path);
  char magic[4];
  uint16_t version = 0;
  uint32_t len = 0;
  f.read(magic, 4);
  f.read(reinterpret_cast<char*>(&version), sizeof(version));
  f.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!f || std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError("not a WNET checkpoint: " + path);
  }
  if (version != kVersion) throw DataError("unsupported checkpoint version: " + path);
  std::string header_text(len, '\0');
  f.read(header_text.data(), len);
  if (!f) throw DataError("truncated checkpoint header: " + path);

  Checkpoint ckpt;
  try {
    json header = json::parse(header_text);
    ckpt.spec = NetworkSpec::from_json(header.at("spec").dump());
    ckpt.channel_means = header.at("channel_means").get<std::vector<float>>();
    ckpt.iteration = header.at("iteration").get<int64_t>();
    ckpt.has_momentum = header.at("has_momentum").get<bool>();
  } catch (const json::exception& e) {
    throw DataError("bad checkpoint header: " + std::string(e.what()));
  }

  Network<float> net(ckpt.spec);
  ckpt.params = net.init_params(0);
  for (auto& l : ckpt.params.layers) {
    read_tensor(f, l.w);
    read_tensor(f, l.b);
  }
  if (ckpt.has_momentum) {
    ckpt.momentum = net.init_params(0);
    for (auto& l : ckpt.momentum.layers) {
      read_tensor(f, l.w);
      read_tensor(f, l.b);
    }
  }
  if (!f) throw DataError("truncated checkpoint payload: " + path);
  return ckpt;
}

}  // namespace wits::nn
