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

// Slow, direct reference implementations used only by tests. Nothing here
// calls into the library's numeric kernels.

#ifndef DENSEFOCUS_TESTS_ORACLES_H_
#define DENSEFOCUS_TESTS_ORACLES_H_

#include <cstdint>
#include <span>
#include <vector>

#include "densefocus/annotation.h"
#include "densefocus/evalkit.h"
#include "densefocus/tensor.h"

namespace densefocus::oracle {

// Tensor filled with uniform values in [lo, hi) from a SplitMix64 stream.
Tensor RandomTensor(const Shape& shape, std::uint64_t seed, double lo = -1.0,
                    double hi = 1.0);

// 1-D orthonormal DCT-II by the defining sum.
std::vector<double> Dct1d(std::span<const double> x);

// Per-channel 2-D orthonormal DCT-II / DCT-III by the defining double sums.
Tensor Dct2(const Tensor& t);
Tensor Idct2(const Tensor& t);

// Zero-padded cross-correlation over an explicitly padded copy. Terms are
// accumulated input channel by input channel, kernel row-major, then the
// bias is added.
Tensor Conv2d(const Tensor& t, const Tensor& w, const Tensor& b,
              std::size_t stride, std::size_t pad);

// Pads bottom/right by edge replication to whole windows, then averages.
Tensor AvgPool(const Tensor& t, std::size_t k);

Tensor Matmul(const Tensor& a, const Tensor& b);

// Per-channel convolution written as C single-channel Conv2d calls followed
// by a pointwise Conv2d.
Tensor DepthwiseSeparable(const Tensor& t, const Tensor& dw, const Tensor& pw);

double Sigmoid(double x);

// Squeeze (spatial mean), w1/b1, relu, w2/b2, sigmoid, per-channel scale.
Tensor ChannelAttention(const Tensor& x, const Tensor& w1, const Tensor& b1,
                        const Tensor& w2, const Tensor& b2);
// Gate = sigmoid(conv_k([mean_c x, max_c x]) + b) applied per pixel.
Tensor SpatialAttention(const Tensor& x, const Tensor& w, const Tensor& b);
// sigmoid(conv1x1(relu(conv3x3(d) + b1)) + b2).
Tensor Calibrate(const Tensor& d, const Tensor& w1, const Tensor& b1,
                 const Tensor& w2, const Tensor& b2);

struct EdhReference {
  Tensor affinity;  // [C,C]
  Tensor out;       // [C,h,w]
};
// One fusion path from pooled features p, the (already resized) density d
// and calibrated density dc, composed step by step.
EdhReference Edh(const Tensor& p, const Tensor& d, const Tensor& dc,
                 const Tensor& mask_w, const Tensor& mask_b,
                 const Tensor& ca_w1, const Tensor& ca_b1, const Tensor& ca_w2,
                 const Tensor& ca_b2, const Tensor& sa_w, const Tensor& sa_b,
                 const Tensor& cross_h, const Tensor& cross_l);

// Mean of squared differences by a double loop over [1,H,W].
double DensityLoss(const Tensor& a, const Tensor& b);

// Region refinement on a 4x4 grid. Bit (4r + c) of `mask` is cell (r, c).
// Lloyd's 2-means from the corner seeds in exact rational arithmetic; the
// result is the union of the clusters' bounding rectangles in the same bit
// layout.
std::uint16_t RefineMask4x4(std::uint16_t mask);

// COCO AP for one IoU threshold and area range computed directly from the
// precision/recall staircase: category mean, -1 without ground truth.
double ApAt(std::span<const Detection> dets, std::span<const BBoxAnnotation> gts,
            double iou, const AreaRange& range, std::size_t max_dets);

}  // namespace densefocus::oracle

#endif  // DENSEFOCUS_TESTS_ORACLES_H_
