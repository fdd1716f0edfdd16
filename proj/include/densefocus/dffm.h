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
#ifndef DENSEFOCUS_DFFM_H_
#define DENSEFOCUS_DFFM_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "densefocus/attention.h"
#include "densefocus/autodiff.h"
#include "densefocus/density.h"
#include "densefocus/params.h"
#include "densefocus/tensor.h"

namespace densefocus {

// One pooled path of the fusion module.
template <class T>
struct EdhWeights {
  T mask_w;  // [1,C,1,1] low-frequency mask projector
  T mask_b;  // [1]
  ChannelAttentionWeights<T> ca;
  SpatialAttentionWeights<T> sa;
  T cross_h, cross_l;  // [C,C]

  template <class Self, class F>
  static void Visit(Self& s, F&& f) {
    f("mask_w", s.mask_w);
    f("mask_b", s.mask_b);
    VisitNested(s.ca, "ca.", f);
    VisitNested(s.sa, "sa.", f);
    f("cross_h", s.cross_h);
    f("cross_l", s.cross_l);
  }
  template <class F>
  auto Map(F&& f) const {
    using U = decltype(f(mask_w));
    EdhWeights<U> out;
    out.mask_w = f(mask_w);
    out.mask_b = f(mask_b);
    out.ca = ca.Map(f);
    out.sa = sa.Map(f);
    out.cross_h = f(cross_h);
    out.cross_l = f(cross_l);
    return out;
  }
};

template <class T>
struct DffmWeights {
  CalibrationWeights<T> cal;
  std::vector<EdhWeights<T>> paths;
  T conv_w, conv_b;  // full-resolution 3x3 path: [C,C,3,3], [C]
  T agg_w, agg_b;    // aggregation 1x1: [C,C,1,1], [C]

  template <class Self, class F>
  static void Visit(Self& s, F&& f) {
    VisitNested(s.cal, "cal.", f);
    for (std::size_t i = 0; i < s.paths.size(); ++i) {
      VisitNested(s.paths[i], "path" + std::to_string(i) + ".", f);
    }
    f("conv.w", s.conv_w);
    f("conv.b", s.conv_b);
    f("agg.w", s.agg_w);
    f("agg.b", s.agg_b);
  }
  template <class F>
  auto Map(F&& f) const {
    using U = decltype(f(conv_w));
    DffmWeights<U> out;
    out.cal = cal.Map(f);
    for (const auto& p : paths) out.paths.push_back(p.Map(f));
    out.conv_w = f(conv_w);
    out.conv_b = f(conv_b);
    out.agg_w = f(agg_w);
    out.agg_b = f(agg_b);
    return out;
  }
};

struct DffmConfig {
  std::size_t channels = 8;
  std::vector<std::size_t> kernels = {3, 6, 9};
  std::size_t reduction = kDefaultChannelReduction;
  std::size_t spatial_kernel = kDefaultSpatialKernel;
  std::size_t calibration_channels = kDefaultCalibrationChannels;
};

// Parses "3,6,9"; an empty string yields no pooled paths.
std::vector<std::size_t> ParseKernelSet(const std::string& text);

EdhWeights<Tensor> InitEdh(std::size_t channels, const DffmConfig& cfg,
                           std::uint64_t seed, const std::string& name);
DffmWeights<Tensor> InitDffm(const DffmConfig& cfg, std::uint64_t seed);

// ---------------------------------------------------------------------------

struct FrequencyMasksGraph {
  ag::Var low, high;  // [1,h,w], low + high == 1
};

// M_low = sigmoid(conv1x1(P * D)), M_high = 1 - M_low. `density` must match
// the spatial extent of `features`.
FrequencyMasksGraph FrequencyMasks(const ag::Var& features,
                                   const ag::Var& density, const ag::Var& mask_w,
                                   const ag::Var& mask_b);

struct FrequencyPairGraph {
  ag::Var low, high;  // [C,h,w] DCT coefficients
};

// Splits dct2(features) by complementary masks over frequency coordinates.
FrequencyPairGraph FrequencySplit(const ag::Var& features, const ag::Var& m_low,
                                  const ag::Var& m_high);

struct FrequencyPair {
  Tensor f_low, f_high;
};
FrequencyPair FrequencySplit(const Tensor& features, const Tensor& m_low,
                             const Tensor& m_high);

struct EdhTrace {
  Tensor affinity;  // [C,C], row-stochastic
};

// Cross-frequency fusion of one pooled path:
//   F_l = CA(idct2(f_low)), F_h = SA(idct2(f_high))
//   A = softmax_rows((W_h F_h * D') (W_l F_l * (1 - D'))^T)      [C x C]
//   H = A P + D'   (D' broadcast over channels)
// `calibrated` must match the spatial extent of `features`.
ag::Var Edh(const ag::Var& features, const FrequencyPairGraph& freq,
            const ag::Var& calibrated, const EdhWeights<ag::Var>& w,
            EdhTrace* trace = nullptr);

struct DffmTrace {
  std::vector<Tensor> path_outputs;  // H_i at pooled resolution
  std::vector<Tensor> affinities;
  Tensor conv_path;
};

// Fuses pooled EDH paths (one per kernel) and a 3x3 conv path by summation
// followed by a 1x1 conv. `density` may have any extent. Kernels larger than
// min(H, W) are rejected.
ag::Var DffmForward(const ag::Var& features, const ag::Var& density,
                    const DffmWeights<ag::Var>& w, const DffmConfig& cfg,
                    DffmTrace* trace = nullptr);
Tensor DffmForward(const Tensor& features, const DensityMap& density,
                   const DffmWeights<Tensor>& w, const DffmConfig& cfg,
                   DffmTrace* trace = nullptr);

}  // namespace densefocus

#endif  // DENSEFOCUS_DFFM_H_
