#include "wits/nn/reference.hpp"

#include <algorithm>
#include <cmath>

#include "wits/errors.hpp"

namespace wits::nn::reference {

template <typename T>
TensorT<T> conv2d_forward(const TensorT<T>& in, const TensorT<T>& weights,
                          const TensorT<T>& bias, int stride, int pad) {
  const int h = in.shape[0], w = in.shape[1], cin = in.shape[2];
  const int m = weights.shape[0], kh = weights.shape[1], kw = weights.shape[2];
  if (weights.shape[3] != cin) throw DataError("reference conv: channel mismatch");
  const int oh = (h + 2 * pad - kh) / stride + 1;
  const int ow = (w + 2 * pad - kw) / stride + 1;
  if (h + 2 * pad < kh || oh <= 0 || ow <= 0) {
    throw DataError("reference conv: non-positive output extent");
  }

  TensorT<T> out({oh, ow, m});
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      for (int oc = 0; oc < m; ++oc) {
        T acc = bias.data[oc];
        for (int ky = 0; ky < kh; ++ky) {
          for (int kx = 0; kx < kw; ++kx) {
            int iy = oy * stride + ky - pad;
            int ix = ox * stride + kx - pad;
            if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
            for (int ic = 0; ic < cin; ++ic) {
              T pixel = in.data[(static_cast<size_t>(iy) * w + ix) * cin + ic];
              T weight =
                  weights.data[((static_cast<size_t>(oc) * kh + ky) * kw + kx) * cin + ic];
              acc += pixel * weight;
            }
          }
        }
        out.data[(static_cast<size_t>(oy) * ow + ox) * m + oc] = acc;
      }
    }
  }
  return out;
}

template <typename T>
TensorT<T> maxpool_forward(const TensorT<T>& in, int window, int stride) {
  const int h = in.shape[0], w = in.shape[1], c = in.shape[2];
  if (window > h || window > w) throw DataError("reference pool: window too large");
  const int oh = (h - window) / stride + 1;
  const int ow = (w - window) / stride + 1;

  TensorT<T> out({oh, ow, c});
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      for (int ch = 0; ch < c; ++ch) {
        T best = in.data[(static_cast<size_t>(oy * stride) * w + ox * stride) * c + ch];
        for (int ky = 0; ky < window; ++ky) {
          for (int kx = 0; kx < window; ++kx) {
            T v = in.data[(static_cast<size_t>(oy * stride + ky) * w + ox * stride + kx) *
                              c +
                          ch];
            if (v > best) best = v;
          }
        }
        out.data[(static_cast<size_t>(oy) * ow + ox) * c + ch] = best;
      }
    }
  }
  return out;
}

template <typename T>
TensorT<T> lrn_forward(const TensorT<T>& in, int n, double k, double alpha,
                       double beta) {
  const int h = in.shape[0], w = in.shape[1], c = in.shape[2];
  const int half = n / 2;
  TensorT<T> out(in.shape);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        double sum_sq = 0.0;
        for (int j = std::max(0, ch - half); j <= std::min(c - 1, ch + half); ++j) {
          double v = in.data[(static_cast<size_t>(y) * w + x) * c + j];
          sum_sq += v * v;
        }
        double denom = std::pow(k + (alpha / n) * sum_sq, beta);
        out.data[(static_cast<size_t>(y) * w + x) * c + ch] = static_cast<T>(
            in.data[(static_cast<size_t>(y) * w + x) * c + ch] / denom);
      }
    }
  }
  return out;
}

template TensorT<float> conv2d_forward(const TensorT<float>&, const TensorT<float>&,
                                       const TensorT<float>&, int, int);
template TensorT<double> conv2d_forward(const TensorT<double>&, const TensorT<double>&,
                                        const TensorT<double>&, int, int);
template TensorT<float> maxpool_forward(const TensorT<float>&, int, int);
template TensorT<double> maxpool_forward(const TensorT<double>&, int, int);
template TensorT<float> lrn_forward(const TensorT<float>&, int, double, double, double);
template TensorT<double> lrn_forward(const TensorT<double>&, int, double, double,
                                     double);

}  // namespace wits::nn::reference
