#pragma once

#include "wits/tensor.hpp"

namespace wits::nn::reference {

// Naive serial kernels operating on single samples in HWC layout. These are
// the ground truth the optimized OpenMP kernels are tested against and the
// baseline the benchmark compares with. Keep them straightforward nested
// loops; performance is not their job.

// in [H,W,Cin], weights [M,kh,kw,Cin], bias [M] -> out [OH,OW,M]
template <typename T>
TensorT<T> conv2d_forward(const TensorT<T>& in, const TensorT<T>& weights,
                          const TensorT<T>& bias, int stride, int pad);

// in [H,W,C] -> out [OH,OW,C]
template <typename T>
TensorT<T> maxpool_forward(const TensorT<T>& in, int window, int stride);

// Across-channel local response normalization.
template <typename T>
TensorT<T> lrn_forward(const TensorT<T>& in, int n, double k, double alpha,
                       double beta);

}  // namespace wits::nn::reference
