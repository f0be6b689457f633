#include "wits/nn/spec.hpp"

#include <json.hpp>

#include "wits/errors.hpp"

namespace wits::nn {

using json = nlohmann::ordered_json;

LayerSpec LayerSpec::conv(int out_channels, int kernel, int stride, int pad) {
  LayerSpec l;
  l.kind = LayerKind::Conv;
  l.out_channels = out_channels;
  l.kernel = kernel;
  l.stride = stride;
  l.pad = pad;
  return l;
}

LayerSpec LayerSpec::relu() {
  LayerSpec l;
  l.kind = LayerKind::ReLU;
  return l;
}

LayerSpec LayerSpec::maxpool(int window, int stride) {
  LayerSpec l;
  l.kind = LayerKind::MaxPool;
  l.window = window;
  l.stride = stride;
  return l;
}

LayerSpec LayerSpec::lrn(int n, double k, double alpha, double beta) {
  LayerSpec l;
  l.kind = LayerKind::Lrn;
  l.lrn_n = n;
  l.lrn_k = k;
  l.lrn_alpha = alpha;
  l.lrn_beta = beta;
  return l;
}

LayerSpec LayerSpec::dense(int units) {
  LayerSpec l;
  l.kind = LayerKind::Dense;
  l.units = units;
  return l;
}

LayerSpec LayerSpec::dropout(double rate) {
  LayerSpec l;
  l.kind = LayerKind::Dropout;
  l.rate = rate;
  return l;
}

LayerSpec LayerSpec::softmax_xent() {
  LayerSpec l;
  l.kind = LayerKind::SoftmaxXent;
  return l;
}

std::vector<Shape3> NetworkSpec::infer_shapes() const {
  if (input.h <= 0 || input.w <= 0 || input.c <= 0) {
    throw DataError("network input shape must be positive");
  }
  if (layers.empty() || layers.back().kind != LayerKind::SoftmaxXent) {
    throw DataError("network must end in a softmax cross-entropy layer");
  }

  std::vector<Shape3> shapes;
  Shape3 cur = input;
  for (size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    switch (l.kind) {
      case LayerKind::Conv: {
        if (l.kernel <= 0 || l.stride < 1 || l.pad < 0 || l.out_channels <= 0) {
          throw DataError("bad conv hyperparameters");
        }
        int oh = (cur.h + 2 * l.pad - l.kernel) / l.stride + 1;
        int ow = (cur.w + 2 * l.pad - l.kernel) / l.stride + 1;
        if (cur.h + 2 * l.pad < l.kernel || oh <= 0 || ow <= 0) {
          throw DataError("conv output extent is non-positive at layer " +
                          std::to_string(i));
        }
        cur = {oh, ow, l.out_channels};
        break;
      }
      case LayerKind::MaxPool: {
        if (l.window <= 0 || l.stride < 1) throw DataError("bad maxpool hyperparameters");
        if (l.window > cur.h || l.window > cur.w) {
          throw DataError("pool window exceeds input at layer " + std::to_string(i));
        }
        cur = {(cur.h - l.window) / l.stride + 1, (cur.w - l.window) / l.stride + 1,
               cur.c};
        break;
      }
      case LayerKind::Lrn:
        if (l.lrn_n < 1 || l.lrn_k <= 0.0) throw DataError("bad lrn hyperparameters");
        break;
      case LayerKind::ReLU:
        break;
      case LayerKind::Dense:
        if (l.units <= 0) throw DataError("dense units must be positive");
        cur = {1, 1, l.units};
        break;
      case LayerKind::Dropout:
        if (l.rate < 0.0 || l.rate >= 1.0) throw DataError("dropout rate must be in [0,1)");
        break;
      case LayerKind::SoftmaxXent:
        if (i + 1 != layers.size()) throw DataError("softmax must be the final layer");
        if (cur.count() != classes) {
          throw DataError("softmax expects " + std::to_string(classes) +
                          " logits, got " + std::to_string(cur.count()));
        }
        break;
    }
    shapes.push_back(cur);
  }
  return shapes;
}

int64_t NetworkSpec::param_count() const {
  auto shapes = infer_shapes();
  int64_t total = 0;
  Shape3 cur = input;
  for (size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    if (l.kind == LayerKind::Conv) {
      total += static_cast<int64_t>(l.out_channels) * l.kernel * l.kernel * cur.c +
               l.out_channels;
    } else if (l.kind == LayerKind::Dense) {
      total += static_cast<int64_t>(l.units) * cur.count() + l.units;
    }
    cur = shapes[i];
  }
  return total;
}

namespace {

const char* kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::Conv: return "conv";
    case LayerKind::ReLU: return "relu";
    case LayerKind::MaxPool: return "maxpool";
    case LayerKind::Lrn: return "lrn";
    case LayerKind::Dense: return "dense";
    case LayerKind::Dropout: return "dropout";
    case LayerKind::SoftmaxXent: return "softmax_xent";
  }
  return "unknown";
}

LayerKind kind_from_name(const std::string& s) {
  if (s == "conv") return LayerKind::Conv;
  if (s == "relu") return LayerKind::ReLU;
  if (s == "maxpool") return LayerKind::MaxPool;
  if (s == "lrn") return LayerKind::Lrn;
  if (s == "dense") return LayerKind::Dense;
  if (s == "dropout") return LayerKind::Dropout;
  if (s == "softmax_xent") return LayerKind::SoftmaxXent;
  throw DataError("unknown layer kind: " + s);
}

}  // namespace

std::string NetworkSpec::to_json() const {
  json j;
  j["input"] = {input.h, input.w, input.c};
  j["classes"] = classes;
  json layers_json = json::array();
  for (const auto& l : layers) {
    json lj;
    lj["kind"] = kind_name(l.kind);
    switch (l.kind) {
      case LayerKind::Conv:
        lj["out_channels"] = l.out_channels;
        lj["kernel"] = l.kernel;
        lj["stride"] = l.stride;
        lj["pad"] = l.pad;
        break;
      case LayerKind::MaxPool:
        lj["window"] = l.window;
        lj["stride"] = l.stride;
        break;
      case LayerKind::Lrn:
        lj["n"] = l.lrn_n;
        lj["k"] = l.lrn_k;
        lj["alpha"] = l.lrn_alpha;
        lj["beta"] = l.lrn_beta;
        break;
      case LayerKind::Dense:
        lj["units"] = l.units;
        break;
      case LayerKind::Dropout:
        lj["rate"] = l.rate;
        break;
      default:
        break;
    }
    layers_json.push_back(lj);
  }
  j["layers"] = layers_json;
  return j.dump();
}

NetworkSpec NetworkSpec::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("bad network spec json: ") + e.what());
  }
  NetworkSpec spec;
  try {
    auto in = j.at("input");
    spec.input = {in.at(0).get<int>(), in.at(1).get<int>(), in.at(2).get<int>()};
    spec.classes = j.at("classes").get<int>();
    for (const auto& lj : j.at("layers")) {
      LayerSpec l;
      l.kind = kind_from_name(lj.at("kind").get<std::string>());
      switch (l.kind) {
        case LayerKind::Conv:
          l.out_channels = lj.at("out_channels").get<int>();
          l.kernel = lj.at("kernel").get<int>();
          l.stride = lj.at("stride").get<int>();
          l.pad = lj.at("pad").get<int>();
          break;
        case LayerKind::MaxPool:
          l.window = lj.at("window").get<int>();
          l.stride = lj.at("stride").get<int>();
          break;
        case LayerKind::Lrn:
          l.lrn_n = lj.at("n").get<int>();
          l.lrn_k = lj.at("k").get<double>();
          l.lrn_alpha = lj.at("alpha").get<double>();
          l.lrn_beta = lj.at("beta").get<double>();
          break;
        case LayerKind::Dense:
          l.units = lj.at("units").get<int>();
          break;
        case LayerKind::Dropout:
          l.rate = lj.at("rate").get<double>();
          break;
        default:
          break;
      }
      spec.layers.push_back(l);
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("bad network spec json: ") + e.what());
  }
  spec.infer_shapes();  // validate
  return spec;
}

NetworkSpec NetworkSpec::alexnet(int input_size, int input_channels) {
  NetworkSpec spec;
  spec.input = {input_size, input_size, input_channels};
  spec.layers = {
      LayerSpec::conv(96, 11, 4, 2),  LayerSpec::relu(), LayerSpec::lrn(),
      LayerSpec::maxpool(3, 2),
      LayerSpec::conv(256, 5, 1, 2),  LayerSpec::relu(), LayerSpec::lrn(),
      LayerSpec::maxpool(3, 2),
      LayerSpec::conv(384, 3, 1, 1),  LayerSpec::relu(),
      LayerSpec::conv(384, 3, 1, 1),  LayerSpec::relu(),
      LayerSpec::conv(256, 3, 1, 1),  LayerSpec::relu(),
      LayerSpec::maxpool(3, 2),
      LayerSpec::dense(4096),         LayerSpec::relu(), LayerSpec::dropout(0.5),
      LayerSpec::dense(4096),         LayerSpec::relu(), LayerSpec::dropout(0.5),
      LayerSpec::dense(2),            LayerSpec::softmax_xent(),
  };
  return spec;
}

NetworkSpec NetworkSpec::tiny(int input_size, int input_channels) {
  NetworkSpec spec;
  spec.input = {input_size, input_size, input_channels};
  spec.layers = {
      LayerSpec::conv(16, 5, 2, 2), LayerSpec::relu(), LayerSpec::lrn(),
      LayerSpec::maxpool(3, 2),
      LayerSpec::conv(32, 3, 1, 1), LayerSpec::relu(),
      LayerSpec::maxpool(3, 2),
      LayerSpec::dense(128),        LayerSpec::relu(), LayerSpec::dropout(0.5),
      LayerSpec::dense(2),          LayerSpec::softmax_xent(),
  };
  return spec;
}

}  // namespace wits::nn
