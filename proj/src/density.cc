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
#include "densefocus/density.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "densefocus/errors.h"
#include "densefocus/ops.h"

namespace densefocus {

DensityMap::DensityMap(Tensor values) : values_(std::move(values)) {
  if (values_.rank() != 3 || values_.dim(0) != 1) {
    throw InvalidArgument("density map must be [1,H,W], got " +
                          ShapeToString(values_.shape()));
  }
  for (double v : values_.data()) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InvalidArgument("density map values must be finite and >= 0");
    }
  }
}

DensityMap DensityMap::Resized(std::size_t h, std::size_t w) const {
  Tensor r = ops::BilinearResize(values_, h, w);
  for (double& v : r.data()) v = std::max(v, 0.0);
  return DensityMap(std::move(r));
}

double KernelBandwidth(double box_h, double box_w) {
  return 0.5 * std::sqrt(box_h * box_h + box_w * box_w);
}

GtDensityResult GtDensity(std::span<const BBoxAnnotation> annotations,
                          std::size_t height, std::size_t width) {
  if (height == 0 || width == 0) {
    throw InvalidArgument("GtDensity: image extents must be positive");
  }
  Tensor map({1, height, width});
  std::size_t skipped = 0;
  const double hd = static_cast<double>(height);
  const double wd = static_cast<double>(width);
  const auto rows = static_cast<std::ptrdiff_t>(height);
  const auto cols = static_cast<std::ptrdiff_t>(width);
  for (const BBoxAnnotation& a : annotations) {
    const Box b = a.box();
    const double x0 = std::clamp(b.x, 0.0, wd);
    const double x1 = std::clamp(b.x + b.w, 0.0, wd);
    const double y0 = std::clamp(b.y, 0.0, hd);
    const double y1 = std::clamp(b.y + b.h, 0.0, hd);
    const double bw = x1 - x0, bh = y1 - y0;
    if (!(bw > 0.0) || !(bh > 0.0)) {
      ++skipped;
      continue;
    }
    const double mx = (x0 + x1) / 2.0;
    const double my = (y0 + y1) / 2.0;
    const double gamma = KernelBandwidth(bh, bw);
    const double two_var = 2.0 * gamma * gamma;
    const double norm = 1.0 / (std::numbers::pi * two_var);
    const double radius = std::ceil(3.0 * gamma);
    const double r2 = radius * radius;
    // Pixel (r, c) samples the continuous point (c + 0.5, r + 0.5).
    const auto r_lo = std::max<std::ptrdiff_t>(
        0, static_cast<std::ptrdiff_t>(std::floor(my - 0.5 - radius)));
    const auto r_hi = std::min<std::ptrdiff_t>(
        rows - 1, static_cast<std::ptrdiff_t>(std::ceil(my - 0.5 + radius)));
    const auto c_lo = std::max<std::ptrdiff_t>(
        0, static_cast<std::ptrdiff_t>(std::floor(mx - 0.5 - radius)));
    const auto c_hi = std::min<std::ptrdiff_t>(
        cols - 1, static_cast<std::ptrdiff_t>(std::ceil(mx - 0.5 + radius)));
    for (std::ptrdiff_t r = r_lo; r <= r_hi; ++r) {
      const double dy = static_cast<double>(r) + 0.5 - my;
      for (std::ptrdiff_t c = c_lo; c <= c_hi; ++c) {
        const double dx = static_cast<double>(c) + 0.5 - mx;
        const double d2 = dx * dx + dy * dy;
        if (d2 > r2) continue;
        map.at(0, static_cast<std::size_t>(r), static_cast<std::size_t>(c)) +=
            norm * std::exp(-d2 / two_var);
      }
    }
  }
  return {DensityMap(std::move(map)), skipped};
}

double DensityLoss(const DensityMap& pred, const DensityMap& gt) {
  return DensityLoss(ag::Constant(pred.values()), ag::Constant(gt.values()))
      .value()
      .item();
}

ag::Var DensityLoss(const ag::Var& pred, const ag::Var& gt) {
  if (pred.shape() != gt.shape()) {
    throw InvalidArgument("DensityLoss: shape mismatch " +
                          ShapeToString(pred.shape()) + " vs " +
                          ShapeToString(gt.shape()) +
                          "; resize explicitly before comparing");
  }
  return ag::MeanSquaredError(gt, pred);
}

double TotalLoss(double l_reg, double l_cls, double l_dense,
                 const LossWeights& weights) {
  for (double v : {l_reg, l_cls, l_dense}) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InvalidArgument("TotalLoss: loss terms must be finite and >= 0");
    }
  }
  // Ascending order makes the sum independent of argument order.
  std::array<double, 3> terms = {weights.reg * l_reg, weights.cls * l_cls,
                                 weights.dense * l_dense};
  std::sort(terms.begin(), terms.end());
  return (terms[0] + terms[1]) + terms[2];
}

void DgbConfig::Validate() const {
  if (encoder_stages == 0 || encoder_stages != decoder_stages) {
    throw InvalidArgument(
        "DgbConfig: encoder and decoder stage counts must match and be >= 1");
  }
  if (base_channels == 0 || in_channels == 0) {
    throw InvalidArgument("DgbConfig: channel counts must be positive");
  }
}

DgbWeights<Tensor> InitDgb(const DgbConfig& cfg, std::uint64_t seed) {
  cfg.Validate();
  DgbWeights<Tensor> w;
  const std::size_t base = cfg.base_channels;
  for (std::size_t i = 0; i < cfg.encoder_stages; ++i) {
    const std::size_t cin = i == 0 ? cfg.in_channels : base;
    const std::string p = "dgb.enc" + std::to_string(i);
    w.enc_w.push_back(InitUniform(seed, p + ".w", {base, cin, 3, 3}, cin * 9));
    w.enc_b.push_back(InitUniform(seed, p + ".b", {base}, cin * 9));
  }
  for (std::size_t i = 0; i < cfg.decoder_stages; ++i) {
    const std::string p = "dgb.dec" + std::to_string(i);
    w.dec_w.push_back(InitUniform(seed, p + ".w", {base, base, 3, 3}, base * 9));
    w.dec_b.push_back(InitUniform(seed, p + ".b", {base}, base * 9));
  }
  w.reg_w = InitUniform(seed, "dgb.reg.w", {1, base, 3, 3}, base * 9);
  // Positive so the ReLU head starts active; a dead head gets no gradient.
  w.reg_b = Tensor::Full({1}, kDgbRegressorBiasInit);
  return w;
}

ag::Var DgbForward(const ag::Var& input, const DgbWeights<ag::Var>& w,
                   const DgbConfig& cfg) {
  cfg.Validate();
  RequireChw(input.value(), "DGB input");
  const std::size_t factor = std::size_t{1} << cfg.encoder_stages;
  const std::size_t h = input.shape()[1], wd = input.shape()[2];
  if (h % factor != 0 || wd % factor != 0) {
    throw InvalidArgument("DGB input extents " + std::to_string(h) + "x" +
                          std::to_string(wd) + " must be divisible by " +
                          std::to_string(factor) + "; pad the input");
  }
  ag::Var x = input;
  for (std::size_t i = 0; i < cfg.encoder_stages; ++i) {
    x = ag::Relu(ag::Conv2d(x, w.enc_w[i], w.enc_b[i], 2, 1));
  }
  for (std::size_t i = 0; i < cfg.decoder_stages; ++i) {
    x = ag::BilinearResize(x, x.shape()[1] * 2, x.shape()[2] * 2);
    x = ag::Relu(ag::Conv2d(x, w.dec_w[i], w.dec_b[i], 1, 1));
  }
  return ag::Relu(ag::Conv2d(x, w.reg_w, w.reg_b, 1, 1));
}

DensityMap DgbForward(const Tensor& input, const DgbWeights<Tensor>& w,
                      const DgbConfig& cfg) {
  return DensityMap(DgbForward(ag::Constant(input), Lift(w, false), cfg).value());
}

CalibrationWeights<Tensor> InitCalibration(std::uint64_t seed,
                                           std::size_t mid_channels,
                                           const std::string& name) {
  if (mid_channels == 0) {
    throw InvalidArgument("calibration needs at least one hidden channel");
  }
  return {InitUniform(seed, name + "conv1.w", {mid_channels, 1, 3, 3}, 9),
          InitUniform(seed, name + "conv1.b", {mid_channels}, 9),
          InitUniform(seed, name + "conv2.w", {1, mid_channels, 1, 1},
                      mid_channels),
          InitUniform(seed, name + "conv2.b", {1}, mid_channels)};
}

ag::Var CalibrateDensity(const ag::Var& density,
                         const CalibrationWeights<ag::Var>& w) {
  ag::Var hidden = ag::Relu(ag::Conv2d(density, w.conv1_w, w.conv1_b, 1, 1));
  return ag::Sigmoid(ag::Conv2d(hidden, w.conv2_w, w.conv2_b, 1, 0));
}

DensityMap CalibrateDensity(const DensityMap& density,
                            const CalibrationWeights<Tensor>& w) {
  return DensityMap(
      CalibrateDensity(ag::Constant(density.values()), Lift(w, false)).value());
}

}  // namespace densefocus
