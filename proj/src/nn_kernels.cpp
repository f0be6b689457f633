#include "wits/nn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "wits/errors.hpp"
#include "wits/rng.hpp"

namespace wits::nn::kernels {

namespace {

template <typename T>
void im2col(const T* in, int h, int w, int cin, int kh, int kw, int stride, int pad,
            int oh, int ow, T* patches) {
  // patches[p][k], p = oy*ow + ox, k = (ky*kw + kx)*cin + ic
  const int K = kh * kw * cin;
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      T* row = patches + (static_cast<size_t>(oy) * ow + ox) * K;
      for (int ky = 0; ky < kh; ++ky) {
        int iy = oy * stride + ky - pad;
        for (int kx = 0; kx < kw; ++kx) {
          int ix = ox * stride + kx - pad;
          T* dst = row + (static_cast<size_t>(ky) * kw + kx) * cin;
          if (iy < 0 || iy >= h || ix < 0 || ix >= w) {
            std::fill(dst, dst + cin, T(0));
          } else {
            const T* src = in + (static_cast<size_t>(iy) * w + ix) * cin;
            std::copy(src, src + cin, dst);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* patches, int h, int w, int cin, int kh, int kw, int stride,
                int pad, int oh, int ow, T* din) {
  const int K = kh * kw * cin;
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      const T* row = patches + (static_cast<size_t>(oy) * ow + ox) * K;
      for (int ky = 0; ky < kh; ++ky) {
        int iy = oy * stride + ky - pad;
        if (iy < 0 || iy >= h) continue;
        for (int kx = 0; kx < kw; ++kx) {
          int ix = ox * stride + kx - pad;
          if (ix < 0 || ix >= w) continue;
          const T* src = row + (static_cast<size_t>(ky) * kw + kx) * cin;
          T* dst = din + (static_cast<size_t>(iy) * w + ix) * cin;
          for (int ic = 0; ic < cin; ++ic) dst[ic] += src[ic];
        }
      }
    }
  }
}

// out[p][m] = dot(patches[p], weights[m]) + bias[m]; four output channels
// per pass to keep the patch row hot.
template <typename T>
void patch_gemm(const T* patches, const T* weights, const T* bias, int P, int M,
                int K, T* out) {
  for (int p = 0; p < P; ++p) {
    const T* row = patches + static_cast<size_t>(p) * K;
    int m = 0;
    for (; m + 4 <= M; m += 4) {
      const T* w0 = weights + static_cast<size_t>(m) * K;
      const T* w1 = w0 + K;
      const T* w2 = w1 + K;
      const T* w3 = w2 + K;
      T a0 = 0, a1 = 0, a2 = 0, a3 = 0;
      for (int k = 0; k < K; ++k) {
        T v = row[k];
        a0 += v * w0[k];
        a1 += v * w1[k];
        a2 += v * w2[k];
        a3 += v * w3[k];
      }
      T* o = out + static_cast<size_t>(p) * M + m;
      o[0] = a0 + bias[m];
      o[1] = a1 + bias[m + 1];
      o[2] = a2 + bias[m + 2];
      o[3] = a3 + bias[m + 3];
    }
    for (; m < M; ++m) {
      const T* wm = weights + static_cast<size_t>(m) * K;
      T acc = bias[m];
      for (int k = 0; k < K; ++k) acc += row[k] * wm[k];
      out[static_cast<size_t>(p) * M + m] = acc;
    }
  }
}

inline double uniform01_at(uint64_t key, uint64_t i) {
  return static_cast<double>(splitmix64(key + 0x9e3779b97f4a7c15ull * (i + 1)) >> 11) *
         0x1.0p-53;
}

}  // namespace

template <typename T>
void conv2d_forward(const TensorT<T>& in, const TensorT<T>& weights,
                    const TensorT<T>& bias, int stride, int pad, TensorT<T>& out,
                    TensorT<T>& patches) {
  const int n = in.shape[0], h = in.shape[1], w = in.shape[2], cin = in.shape[3];
  const int m = weights.shape[0], kh = weights.shape[1], kw = weights.shape[2];
  if (weights.shape[3] != cin) throw DataError("conv2d: channel mismatch");
  const int oh = (h + 2 * pad - kh) / stride + 1;
  const int ow = (w + 2 * pad - kw) / stride + 1;
  if (h + 2 * pad < kh || oh <= 0 || ow <= 0) {
    throw DataError("conv2d: non-positive output extent");
  }
  const int P = oh * ow, K = kh * kw * cin;

  out = TensorT<T>({n, oh, ow, m});
  patches = TensorT<T>({n, P, K});

#pragma omp parallel for schedule(static)
  for (int s = 0; s < n; ++s) {
    T* sample_patches = patches.ptr() + static_cast<size_t>(s) * P * K;
    im2col(in.ptr() + static_cast<size_t>(s) * h * w * cin, h, w, cin, kh, kw, stride,
           pad, oh, ow, sample_patches);
    patch_gemm(sample_patches, weights.ptr(), bias.ptr(), P, m,
               K, out.ptr() + static_cast<size_t>(s) * P * m);
  }
}

template <typename T>
void conv2d_backward(const TensorT<T>& dout, const TensorT<T>& weights,
                     const TensorT<T>& patches, int stride, int pad,
                     const Shape3& in_shape, TensorT<T>& din, TensorT<T>& dweights,
                     TensorT<T>& dbias) {
  const int n = dout.shape[0], oh = dout.shape[1], ow = dout.shape[2],
            m = dout.shape[3];
  const int kh = weights.shape[1], kw = weights.shape[2], cin = weights.shape[3];
  const int P = oh * ow, K = kh * kw * cin;

  din = TensorT<T>({n, in_shape.h, in_shape.w, in_shape.c});
  dweights = TensorT<T>(weights.shape);
  dbias = TensorT<T>({m});

  // Input gradient: independent per sample.
#pragma omp parallel for schedule(static)
  for (int s = 0; s < n; ++s) {
    std::vector<T> dpatches(static_cast<size_t>(P) * K, T(0));
    const T* dout_s = dout.ptr() + static_cast<size_t>(s) * P * m;
    for (int p = 0; p < P; ++p) {
      T* drow = dpatches.data() + static_cast<size_t>(p) * K;
      for (int j = 0; j < m; ++j) {
        T g = dout_s[static_cast<size_t>(p) * m + j];
        if (g == T(0)) continue;
        const T* wj = weights.ptr() + static_cast<size_t>(j) * K;
        for (int k = 0; k < K; ++k) drow[k] += g * wj[k];
      }
    }
    col2im_add(dpatches.data(), in_shape.h, in_shape.w, cin, kh, kw, stride, pad, oh,
               ow, din.ptr() + static_cast<size_t>(s) * in_shape.h * in_shape.w * cin);
  }

  // Weight/bias gradients: one output channel per task; the batch reduction
  // runs in a fixed (sample, position) order inside each task.
#pragma omp parallel for schedule(static)
  for (int j = 0; j < m; ++j) {
    T* dw = dweights.ptr() + static_cast<size_t>(j) * K;
    T db = 0;
    for (int s = 0; s < n; ++s) {
      const T* dout_s = dout.ptr() + static_cast<size_t>(s) * P * m;
      const T* patches_s = patches.ptr() + static_cast<size_t>(s) * P * K;
      for (int p = 0; p < P; ++p) {
        T g = dout_s[static_cast<size_t>(p) * m + j];
        if (g == T(0)) continue;
        const T* row = patches_s + static_cast<size_t>(p) * K;
        for (int k = 0; k < K; ++k) dw[k] += g * row[k];
      }
      for (int p = 0; p < P; ++p) db += dout_s[static_cast<size_t>(p) * m + j];
    }
    dbias.data[j] = db;
  }
}

template <typename T>
void maxpool_forward(const TensorT<T>& in, int window, int stride, TensorT<T>& out,
                     std::vector<int32_t>& argmax) {
  const int n = in.shape[0], h = in.shape[1], w = in.shape[2], c = in.shape[3];
  if (window > h || window > w) throw DataError("maxpool: window larger than input");
  const int oh = (h - window) / stride + 1;
  const int ow = (w - window) / stride + 1;

  out = TensorT<T>({n, oh, ow, c});
  argmax.assign(static_cast<size_t>(n) * oh * ow * c, 0);

#pragma omp parallel for schedule(static)
  for (int s = 0; s < n; ++s) {
    const T* in_s = in.ptr() + static_cast<size_t>(s) * h * w * c;
    T* out_s = out.ptr() + static_cast<size_t>(s) * oh * ow * c;
    int32_t* arg_s = argmax.data() + static_cast<size_t>(s) * oh * ow * c;
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        for (int ch = 0; ch < c; ++ch) {
          T best = in_s[(static_cast<size_t>(oy * stride) * w + ox * stride) * c + ch];
          int32_t best_idx =
              static_cast<int32_t>((oy * stride * w + ox * stride) * c + ch);
          for (int ky = 0; ky < window; ++ky) {
            for (int kx = 0; kx < window; ++kx) {
              int idx = ((oy * stride + ky) * w + (ox * stride + kx)) * c + ch;
              if (in_s[idx] > best) {  // strictly greater: first max wins
                best = in_s[idx];
                best_idx = static_cast<int32_t>(idx);
              }
            }
          }
          size_t o = (static_cast<size_t>(oy) * ow + ox) * c + ch;
          out_s[o] = best;
          arg_s[o] = best_idx;
        }
      }
    }
  }
}

template <typename T>
void maxpool_backward(const TensorT<T>& dout, const std::vector<int32_t>& argmax,
                      const Shape3& in_shape, TensorT<T>& din) {
  const int n = dout.shape[0];
  const size_t per_sample_out =
      static_cast<size_t>(dout.shape[1]) * dout.shape[2] * dout.shape[3];
  din = TensorT<T>({n, in_shape.h, in_shape.w, in_shape.c});
  const size_t per_sample_in = in_shape.count();

#pragma omp parallel for schedule(static)
  for (int s = 0; s < n; ++s) {
    const T* dout_s = dout.ptr() + static_cast<size_t>(s) * per_sample_out;
    const int32_t* arg_s = argmax.data() + static_cast<size_t>(s) * per_sample_out;
    T* din_s = din.ptr() + static_cast<size_t>(s) * per_sample_in;
    for (size_t i = 0; i < per_sample_out; ++i) {
      din_s[arg_s[i]] += dout_s[i];
    }
  }
}

template <typename T>
void relu_forward(const TensorT<T>& in, TensorT<T>& out) {
  out = TensorT<T>(in.shape);
  const int64_t n = in.size();
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) {
    out.data[i] = in.data[i] > T(0) ? in.data[i] : T(0);
  }
}

template <typename T>
void relu_backward(const TensorT<T>& dout, const TensorT<T>& in, TensorT<T>& din) {
  din = TensorT<T>(in.shape);
  const int64_t n = in.size();
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) {
    din.data[i] = in.data[i] > T(0) ? dout.data[i] : T(0);
  }
}

template <typename T>
void lrn_forward(const TensorT<T>& in, int n, double k, double alpha, double beta,
                 TensorT<T>& out) {
  const int nb = in.shape[0], h = in.shape[1], w = in.shape[2], c = in.shape[3];
  const int half = n / 2;
  out = TensorT<T>(in.shape);

#pragma omp parallel for schedule(static)
  for (int s = 0; s < nb; ++s) {
    const T* in_s = in.ptr() + static_cast<size_t>(s) * h * w * c;
    T* out_s = out.ptr() + static_cast<size_t>(s) * h * w * c;
    for (int p = 0; p < h * w; ++p) {
      const T* x = in_s + static_cast<size_t>(p) * c;
      T* y = out_s + static_cast<size_t>(p) * c;
      for (int ch = 0; ch < c; ++ch) {
        double sum_sq = 0.0;
        int lo = std::max(0, ch - half), hi = std::min(c - 1, ch + half);
        for (int j = lo; j <= hi; ++j) sum_sq += static_cast<double>(x[j]) * x[j];
        double denom = std::pow(k + (alpha / n) * sum_sq, beta);
        y[ch] = static_cast<T>(x[ch] / denom);
      }
    }
  }
}

template <typename T>
void lrn_backward(const TensorT<T>& dout, const TensorT<T>& in, int n, double k,
                  double alpha, double beta, TensorT<T>& din) {
  const int nb = in.shape[0], h = in.shape[1], w = in.shape[2], c = in.shape[3];
  const int half = n / 2;
  din = TensorT<T>(in.shape);

  // d = k + (alpha/n)*S_c;  y_c = x_c d_c^-b
  // dx_i = dy_i d_i^-b - (2 b alpha / n) x_i * sum_{c: i in W(c)} dy_c x_c d_c^-(b+1)
#pragma omp parallel for schedule(static)
  for (int s = 0; s < nb; ++s) {
    const T* in_s = in.ptr() + static_cast<size_t>(s) * h * w * c;
    const T* dout_s = dout.ptr() + static_cast<size_t>(s) * h * w * c;
    T* din_s = din.ptr() + static_cast<size_t>(s) * h * w * c;
    std::vector<double> dxd(c);  // dy_c * x_c * d_c^-(beta+1)
    std::vector<double> dpow(c);
    for (int p = 0; p < h * w; ++p) {
      const T* x = in_s + static_cast<size_t>(p) * c;
      const T* dy = dout_s + static_cast<size_t>(p) * c;
      T* dx = din_s + static_cast<size_t>(p) * c;
      for (int ch = 0; ch < c; ++ch) {
        double sum_sq = 0.0;
        int lo = std::max(0, ch - half), hi = std::min(c - 1, ch + half);
        for (int j = lo; j <= hi; ++j) sum_sq += static_cast<double>(x[j]) * x[j];
        double d = k + (alpha / n) * sum_sq;
        dpow[ch] = std::pow(d, -beta);
        dxd[ch] = static_cast<double>(dy[ch]) * x[ch] * dpow[ch] / d;
      }
      for (int i = 0; i < c; ++i) {
        double acc = static_cast<double>(dy[i]) * dpow[i];
        int lo = std::max(0, i - half), hi = std::min(c - 1, i + half);
        double cross = 0.0;
        for (int ch = lo; ch <= hi; ++ch) cross += dxd[ch];
        acc -= (2.0 * beta * alpha / n) * static_cast<double>(x[i]) * cross;
        dx[i] = static_cast<T>(acc);
      }
    }
  }
}

template <typename T>
void dense_forward(const TensorT<T>& in, const TensorT<T>& weights,
                   const TensorT<T>& bias, TensorT<T>& out) {
  const int n = in.shape[0];
  const int64_t d = in.size() / n;
  const int u = weights.shape[0];
  if (weights.shape[1] != d) throw DataError("dense: input width mismatch");
  out = TensorT<T>({n, u});

#pragma omp parallel for schedule(static)
  for (int s = 0; s < n; ++s) {
    patch_gemm(in.ptr() + static_cast<size_t>(s) * d, weights.ptr(), bias.ptr(), 1, u,
               static_cast<int>(d), out.ptr() + static_cast<size_t>(s) * u);
  }
}

template <typename T>
void dense_backward(const TensorT<T>& dout, const TensorT<T>& in,
                    const TensorT<T>& weights, TensorT<T>& din, TensorT<T>& dweights,
                    TensorT<T>& dbias) {
  const int n = in.shape[0];
  const int64_t d = in.size() / n;
  const int u = weights.shape[0];

  din = TensorT<T>(in.shape);
  dweights = TensorT<T>(weights.shape);
  dbias = TensorT<T>({u});

#pragma omp parallel for schedule(static)
  for (int s = 0; s < n; ++s) {
    const T* dout_s = dout.ptr() + static_cast<size_t>(s) * u;
    T* din_s = din.ptr() + static_cast<size_t>(s) * d;
    for (int j = 0; j < u; ++j) {
      T g = dout_s[j];
      if (g == T(0)) continue;
      const T* wj = weights.ptr() + static_cast<size_t>(j) * d;
      for (int64_t i = 0; i < d; ++i) din_s[i] += g * wj[i];
    }
  }

#pragma omp parallel for schedule(static)
  for (int j = 0; j < u; ++j) {
    T* dw = dweights.ptr() + static_cast<size_t>(j) * d;
    T db = 0;
    for (int s = 0; s < n; ++s) {
      T g = dout.ptr()[static_cast<size_t>(s) * u + j];
      db += g;
      if (g == T(0)) continue;
      const T* in_s = in.ptr() + static_cast<size_t>(s) * d;
      for (int64_t i = 0; i < d; ++i) dw[i] += g * in_s[i];
    }
    dbias.data[j] = db;
  }
}

template <typename T>
void dropout_forward(const TensorT<T>& in, double rate, uint64_t key, TensorT<T>& out) {
  out = TensorT<T>(in.shape);
  if (rate <= 0.0) {
    out.data = in.data;
    return;
  }
  const T scale = static_cast<T>(1.0 / (1.0 - rate));
  const int64_t n = in.size();
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) {
    out.data[i] = uniform01_at(key, static_cast<uint64_t>(i)) >= rate
                      ? in.data[i] * scale
                      : T(0);
  }
}

template <typename T>
void dropout_backward(const TensorT<T>& dout, double rate, uint64_t key,
                      TensorT<T>& din) {
  din = TensorT<T>(dout.shape);
  if (rate <= 0.0) {
    din.data = dout.data;
    return;
  }
  const T scale = static_cast<T>(1.0 / (1.0 - rate));
  const int64_t n = dout.size();
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i) {
    din.data[i] = uniform01_at(key, static_cast<uint64_t>(i)) >= rate
                      ? dout.data[i] * scale
                      : T(0);
  }
}

template <typename T>
T softmax_xent_forward(const TensorT<T>& logits, const std::vector<int>& labels,
                       TensorT<T>& probs) {
  const int n = logits.shape[0];
  const int c = static_cast<int>(logits.size() / n);
  if (!labels.empty() && static_cast<int>(labels.size()) != n) {
    throw DataError("softmax: label count mismatch");
  }
  probs = TensorT<T>({n, c});

#pragma omp parallel for schedule(static)
  for (int s = 0; s < n; ++s) {
    const T* z = logits.ptr() + static_cast<size_t>(s) * c;
    T* p = probs.ptr() + static_cast<size_t>(s) * c;
    T zmax = z[0];
    for (int j = 1; j < c; ++j) zmax = std::max(zmax, z[j]);
    double denom = 0.0;
    for (int j = 0; j < c; ++j) denom += std::exp(static_cast<double>(z[j] - zmax));
    for (int j = 0; j < c; ++j) {
      p[j] = static_cast<T>(std::exp(static_cast<double>(z[j] - zmax)) / denom);
    }
  }

  if (labels.empty()) return T(0);
  double loss = 0.0;  // fixed-order sum: independent of worker count
  for (int s = 0; s < n; ++s) {
    double p = probs.ptr()[static_cast<size_t>(s) * c + labels[s]];
    loss += -std::log(std::max(p, 1e-300));
  }
  return static_cast<T>(loss / n);
}

template <typename T>
void softmax_xent_backward(const TensorT<T>& probs, const std::vector<int>& labels,
                           TensorT<T>& dlogits) {
  const int n = probs.shape[0];
  const int c = probs.shape[1];
  dlogits = TensorT<T>({n, c});
  const T inv_n = static_cast<T>(1.0 / n);
#pragma omp parallel for schedule(static)
  for (int s = 0; s < n; ++s) {
    const T* p = probs.ptr() + static_cast<size_t>(s) * c;
    T* d = dlogits.ptr() + static_cast<size_t>(s) * c;
    for (int j = 0; j < c; ++j) {
      d[j] = (p[j] - (labels[s] == j ? T(1) : T(0))) * inv_n;
    }
  }
}

#define WITS_INSTANTIATE(T)                                                          \
  template void conv2d_forward<T>(const TensorT<T>&, const TensorT<T>&,              \
                                  const TensorT<T>&, int, int, TensorT<T>&,          \
                                  TensorT<T>&);                                      \
  template void conv2d_backward<T>(const TensorT<T>&, const TensorT<T>&,             \
                                   const TensorT<T>&, int, int, const Shape3&,       \
                                   TensorT<T>&, TensorT<T>&, TensorT<T>&);           \
  template void maxpool_forward<T>(const TensorT<T>&, int, int, TensorT<T>&,         \
                                   std::vector<int32_t>&);                           \
  template void maxpool_backward<T>(const TensorT<T>&, const std::vector<int32_t>&,  \
                                    const Shape3&, TensorT<T>&);                     \
  template void relu_forward<T>(const TensorT<T>&, TensorT<T>&);                     \
  template void relu_backward<T>(const TensorT<T>&, const TensorT<T>&, TensorT<T>&); \
  template void lrn_forward<T>(const TensorT<T>&, int, double, double, double,       \
                               TensorT<T>&);                                         \
  template void lrn_backward<T>(const TensorT<T>&, const TensorT<T>&, int, double,   \
                                double, double, TensorT<T>&);                        \
  template void dense_forward<T>(const TensorT<T>&, const TensorT<T>&,               \
                                 const TensorT<T>&, TensorT<T>&);                    \
  template void dense_backward<T>(const TensorT<T>&, const TensorT<T>&,              \
                                  const TensorT<T>&, TensorT<T>&, TensorT<T>&,       \
                                  TensorT<T>&);                                      \
  template void dropout_forward<T>(const TensorT<T>&, double, uint64_t, TensorT<T>&); \
  template void dropout_backward<T>(const TensorT<T>&, double, uint64_t,             \
                                    TensorT<T>&);                                    \
  template T softmax_xent_forward<T>(const TensorT<T>&, const std::vector<int>&,     \
                                     TensorT<T>&);                                   \
  template void softmax_xent_backward<T>(const TensorT<T>&, const std::vector<int>&, \
                                         TensorT<T>&);

WITS_INSTANTIATE(float)
WITS_INSTANTIATE(double)

#undef WITS_INSTANTIATE

}  // namespace wits::nn::kernels
