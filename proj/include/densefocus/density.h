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
#ifndef DENSEFOCUS_DENSITY_H_
#define DENSEFOCUS_DENSITY_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "densefocus/annotation.h"
#include "densefocus/autodiff.h"
#include "densefocus/params.h"
#include "densefocus/tensor.h"

namespace densefocus {

// Single-channel, non-negative, finite map of shape [1,H,W].
class DensityMap {
 public:
  DensityMap() = default;
  // Throws InvalidArgument if `values` is not [1,H,W], non-negative and finite.
  explicit DensityMap(Tensor values);

  static DensityMap Zeros(std::size_t h, std::size_t w) {
    return DensityMap(Tensor({1, h, w}));
  }

  const Tensor& values() const { return values_; }
  std::size_t height() const { return values_.dim(1); }
  std::size_t width() const { return values_.dim(2); }
  double mass() const { return values_.Sum(); }

  // Bilinear resize to (h, w); resized maps stay non-negative.
  DensityMap Resized(std::size_t h, std::size_t w) const;

 private:
  Tensor values_;
};

// ---------------------------------------------------------------------------
// Ground truth.

// Kernel bandwidth gamma = sqrt(h^2 + w^2) / 2.
double KernelBandwidth(double box_h, double box_w);

struct GtDensityResult {
  DensityMap density;
  // Annotations dropped because they had no area left after clamping.
  std::size_t skipped = 0;
};

// Sum of per-object Gaussians N(center, gamma_i^2 I) / (2 pi gamma_i^2),
// sampled at pixel centers (c + 0.5, r + 0.5) and truncated to the disk of
// radius ceil(3 gamma_i). Boxes are clamped to the image first.
GtDensityResult GtDensity(std::span<const BBoxAnnotation> annotations,
                          std::size_t height, std::size_t width);

// ---------------------------------------------------------------------------
// Losses.

// Mean squared error between two equally-shaped maps.
double DensityLoss(const DensityMap& pred, const DensityMap& gt);
ag::Var DensityLoss(const ag::Var& pred, const ag::Var& gt);

struct LossWeights {
  double reg = 1.0;
  double cls = 1.0;
  double dense = 1.0;
};

// Weighted sum of the detection and density objectives; defaults to the plain
// sum. Negative or non-finite terms are rejected.
double TotalLoss(double l_reg, double l_cls, double l_dense,
                 const LossWeights& weights = {});

// ---------------------------------------------------------------------------
// Density generation branch: strided-conv encoder, upsampling decoder and a
// 3x3 conv + ReLU regressor.

struct DgbConfig {
  std::size_t encoder_stages = 3;
  std::size_t decoder_stages = 3;
  std::size_t base_channels = 8;
  std::size_t in_channels = 1;

  void Validate() const;
};

template <class T>
struct DgbWeights {
  std::vector<T> enc_w, enc_b, dec_w, dec_b;
  T reg_w, reg_b;

  template <class Self, class F>
  static void Visit(Self& s, F&& f) {
    for (std::size_t i = 0; i < s.enc_w.size(); ++i) {
      f("enc" + std::to_string(i) + ".w", s.enc_w[i]);
      f("enc" + std::to_string(i) + ".b", s.enc_b[i]);
    }
    for (std::size_t i = 0; i < s.dec_w.size(); ++i) {
      f("dec" + std::to_string(i) + ".w", s.dec_w[i]);
      f("dec" + std::to_string(i) + ".b", s.dec_b[i]);
    }
    f("reg.w", s.reg_w);
    f("reg.b", s.reg_b);
  }
  template <class F>
  auto Map(F&& f) const {
    using U = decltype(f(reg_w));
    DgbWeights<U> out;
    for (std::size_t i = 0; i < enc_w.size(); ++i) {
      out.enc_w.push_back(f(enc_w[i]));
      out.enc_b.push_back(f(enc_b[i]));
    }
    for (std::size_t i = 0; i < dec_w.size(); ++i) {
      out.dec_w.push_back(f(dec_w[i]));
      out.dec_b.push_back(f(dec_b[i]));
    }
    out.reg_w = f(reg_w);
    out.reg_b = f(reg_b);
    return out;
  }
};

inline constexpr double kDgbRegressorBiasInit = 0.1;

DgbWeights<Tensor> InitDgb(const DgbConfig& cfg, std::uint64_t seed);

// Input extents must be divisible by 2^encoder_stages. Output is [1,H,W].
ag::Var DgbForward(const ag::Var& input, const DgbWeights<ag::Var>& w,
                   const DgbConfig& cfg);
DensityMap DgbForward(const Tensor& input, const DgbWeights<Tensor>& w,
                      const DgbConfig& cfg);

// ---------------------------------------------------------------------------
// Calibration D' = sigmoid(conv1x1(relu(conv3x3(D)))).

inline constexpr std::size_t kDefaultCalibrationChannels = 4;

template <class T>
struct CalibrationWeights {
  T conv1_w, conv1_b, conv2_w, conv2_b;

  template <class Self, class F>
  static void Visit(Self& s, F&& f) {
    f("conv1.w", s.conv1_w);
    f("conv1.b", s.conv1_b);
    f("conv2.w", s.conv2_w);
    f("conv2.b", s.conv2_b);
  }
  template <class F>
  auto Map(F&& f) const {
    using U = decltype(f(conv1_w));
    return CalibrationWeights<U>{f(conv1_w), f(conv1_b), f(conv2_w),
                                 f(conv2_b)};
  }
};

CalibrationWeights<Tensor> InitCalibration(
    std::uint64_t seed, std::size_t mid_channels = kDefaultCalibrationChannels,
    const std::string& name = "cal.");

ag::Var CalibrateDensity(const ag::Var& density,
                         const CalibrationWeights<ag::Var>& w);
// Values of the result lie strictly inside (0, 1).
DensityMap CalibrateDensity(const DensityMap& density,
                            const CalibrationWeights<Tensor>& w);

}  // namespace densefocus

#endif  // DENSEFOCUS_DENSITY_H_
