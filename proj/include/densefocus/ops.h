/* Copyright 2026 The densefocus Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef DENSEFOCUS_OPS_H_
#define DENSEFOCUS_OPS_H_

#include <cstddef>
#include <cstdint>

#include "densefocus/tensor.h"

// Forward primitives over Tensor. Everything here is a pure function of its
// arguments; the only side effect is the thread-local multiply-add counter.
namespace densefocus::ops {

// ---------------------------------------------------------------------------
// Multiply-add instrumentation.

std::uint64_t& MacCounter();
inline void CountMacs(std::uint64_t n) { MacCounter() += n; }

// Measures the multiply-adds executed on this thread while alive.
class MacScope {
 public:
  MacScope() : start_(MacCounter()) {}
  std::uint64_t count() const { return MacCounter() - start_; }

 private:
  std::uint64_t start_;
};

// ---------------------------------------------------------------------------
// Elementwise.

Tensor Add(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);
Tensor Scale(const Tensor& a, double s);

// Logistic function, clamped into the open interval (0, 1) so saturated
// inputs still produce a strict probability.
double Sigmoid(double x);
Tensor Sigmoid(const Tensor& t);
Tensor Relu(const Tensor& t);

// Softmax over `axis` with max subtraction.
Tensor Softmax(const Tensor& t, std::size_t axis);

// x[C,H,W] * m[1,H,W] broadcast over channels.
Tensor MulChannels(const Tensor& x, const Tensor& m);
// x[C,H,W] + m[1,H,W] broadcast over channels.
Tensor AddChannels(const Tensor& x, const Tensor& m);
// x[C,H,W] * g[C] per-channel scale.
Tensor ScaleChannels(const Tensor& x, const Tensor& g);

// ---------------------------------------------------------------------------
// Linear algebra.

Tensor Matmul(const Tensor& a, const Tensor& b);
Tensor Transpose(const Tensor& a);

// ---------------------------------------------------------------------------
// Spatial.

// Align-corners bilinear resize; an output extent of 1 samples the centroid.
Tensor BilinearResize(const Tensor& t, std::size_t out_h, std::size_t out_w);

// Output extent of a pooling window sweep with edge-replication padding.
std::size_t PoolExtent(std::size_t in, std::size_t k, std::size_t stride);

// Mean pooling; stride 0 means stride = k. Extents not covered by whole
// windows are padded on the bottom/right by edge replication.
Tensor AvgPool(const Tensor& t, std::size_t k, std::size_t stride = 0);

// Cross-correlation. weights [Cout,Cin,kh,kw]; bias [Cout] or empty.
// Each output sums channel by channel, kernel row-major within a channel.
Tensor Conv2d(const Tensor& t, const Tensor& weights, const Tensor& bias,
              std::size_t stride, std::size_t pad);

// Per-channel convolution; weights [C,1,k,k], odd k, "same" zero padding.
Tensor DepthwiseConv(const Tensor& t, const Tensor& weights);

// DepthwiseConv followed by a bias-free 1x1 Conv2d with pw [Cout,C,1,1].
Tensor DepthwiseSeparableConv(const Tensor& t, const Tensor& dw,
                              const Tensor& pw);

// ---------------------------------------------------------------------------
// Orthonormal type-II DCT over the two spatial axes of each channel, and its
// inverse (type-III). Rank-2 inputs are treated as a single channel.

Tensor Dct2(const Tensor& t);
Tensor Idct2(const Tensor& t);

// N x N orthonormal DCT-II basis: row k holds alpha_k cos(pi (2n+1) k / 2N).
const Tensor& DctMatrix(std::size_t n);

// ---------------------------------------------------------------------------
// Reductions.

// [C,H,W] -> [1,H,W].
Tensor ChannelMean(const Tensor& t);
Tensor ChannelMax(const Tensor& t);
// [C,H,W] -> [C].
Tensor SpatialMean(const Tensor& t);
// Stack [Ci,H,W] tensors along channels.
Tensor ConcatChannels(const Tensor& a, const Tensor& b);

}  // namespace densefocus::ops

#endif  // DENSEFOCUS_OPS_H_
