#pragma once

#include <cstdint>
#include <vector>

#include "wits/nn/spec.hpp"
#include "wits/tensor.hpp"

namespace wits::nn::kernels {

// Optimized batched kernels in NHWC layout, parallelized with OpenMP.
//
// Determinism contract: results are bit-identical for any worker count.
// Loops parallelize only over axes that do not split a reduction — batch
// samples for forwards/input-gradients, output channels/units for
// weight-gradients (each channel sums its batch contribution in a fixed
// order).

// Convolution via im2col + row-dot GEMM. `patches` caches the per-sample
// im2col matrices ([N, P, K] with P = OH*OW, K = kh*kw*Cin) for the
// backward pass.
template <typename T>
void conv2d_forward(const TensorT<T>& in, const TensorT<T>& weights,
                    const TensorT<T>& bias, int stride, int pad, TensorT<T>& out,
                    TensorT<T>& patches);

template <typename T>
void conv2d_backward(const TensorT<T>& dout, const TensorT<T>& weights,
                     const TensorT<T>& patches, int stride, int pad,
                     const Shape3& in_shape, TensorT<T>& din, TensorT<T>& dweights,
                     TensorT<T>& dbias);

// Max pooling; argmax stores, per output element, the flat HWC index of the
// first maximum (row-major window scan) within the sample.
template <typename T>
void maxpool_forward(const TensorT<T>& in, int window, int stride, TensorT<T>& out,
                     std::vector<int32_t>& argmax);

template <typename T>
void maxpool_backward(const TensorT<T>& dout, const std::vector<int32_t>& argmax,
                      const Shape3& in_shape, TensorT<T>& din);

template <typename T>
void relu_forward(const TensorT<T>& in, TensorT<T>& out);

template <typename T>
void relu_backward(const TensorT<T>& dout, const TensorT<T>& in, TensorT<T>& din);

template <typename T>
void lrn_forward(const TensorT<T>& in, int n, double k, double alpha, double beta,
                 TensorT<T>& out);

template <typename T>
void lrn_backward(const TensorT<T>& dout, const TensorT<T>& in, int n, double k,
                  double alpha, double beta, TensorT<T>& din);

// in [N, D] (flattened), weights [U, D], bias [U] -> out [N, U]
template <typename T>
void dense_forward(const TensorT<T>& in, const TensorT<T>& weights,
                   const TensorT<T>& bias, TensorT<T>& out);

template <typename T>
void dense_backward(const TensorT<T>& dout, const TensorT<T>& in,
                    const TensorT<T>& weights, TensorT<T>& din, TensorT<T>& dweights,
                    TensorT<T>& dbias);

// Inverted dropout. The mask is a pure function of (key, element index), so
// forward and backward recompute it instead of storing it, and results do
// not depend on batch parallelism.
template <typename T>
void dropout_forward(const TensorT<T>& in, double rate, uint64_t key, TensorT<T>& out);

template <typename T>
void dropout_backward(const TensorT<T>& dout, double rate, uint64_t key,
                      TensorT<T>& din);

// Numerically stable softmax + cross-entropy over [N, classes] logits.
// Returns mean loss; probs [N, classes]; dlogits = (p - onehot)/N.
template <typename T>
T softmax_xent_forward(const TensorT<T>& logits, const std::vector<int>& labels,
                       TensorT<T>& probs);

template <typename T>
void softmax_xent_backward(const TensorT<T>& probs, const std::vector<int>& labels,
                           TensorT<T>& dlogits);

}  // namespace wits::nn::kernels
