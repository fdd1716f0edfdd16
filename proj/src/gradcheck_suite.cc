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
#include "densefocus/gradcheck_suite.h"

#include <cmath>
#include <span>
#include <utility>

#include "densefocus/attention.h"
#include "densefocus/autodiff.h"
#include "densefocus/dafm.h"
#include "densefocus/density.h"
#include "densefocus/dffm.h"
#include "densefocus/errors.h"
#include "densefocus/params.h"
#include "densefocus/rng.h"

namespace densefocus {

namespace {

Tensor RandomNormal(SplitMix64& rng, Shape shape) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.Normal();
  return t;
}

Tensor RandomUniform(SplitMix64& rng, Shape shape, double lo, double hi) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.Uniform(lo, hi);
  return t;
}

Tensor RandomSigns(SplitMix64& rng, Shape shape) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.Uniform() < 0.5 ? -1.0 : 1.0;
  return t;
}

// Sum of three random plane waves per channel. Smooth inputs keep their
// amplitude through the pooled paths, which keeps every coordinate's
// gradient well above finite-difference roundoff.
Tensor SmoothField(SplitMix64& rng, Shape shape, double amplitude) {
  Tensor t(std::move(shape));
  for (std::size_t c = 0; c < t.dim(0); ++c) {
    double a[3], fy[3], fx[3], phase[3];
    for (int k = 0; k < 3; ++k) {
      a[k] = rng.Normal();
      fy[k] = rng.Uniform(0.0, 0.5);
      fx[k] = rng.Uniform(0.0, 0.5);
      phase[k] = rng.Uniform(0.0, 2.0 * M_PI);
    }
    for (std::size_t i = 0; i < t.dim(1); ++i) {
      for (std::size_t j = 0; j < t.dim(2); ++j) {
        double v = 0.0;
        for (int k = 0; k < 3; ++k) {
          v += a[k] * std::cos(fy[k] * static_cast<double>(i) +
                               fx[k] * static_cast<double>(j) + phase[k]);
        }
        t.at(c, i, j) = amplitude * v;
      }
    }
  }
  return t;
}

// Point layout: the `inputs` first, then the flattened weights.
template <class W>
std::vector<Tensor> PointOf(std::vector<Tensor> inputs, const W& weights) {
  for (const Tensor* t : Flatten(weights)) inputs.push_back(*t);
  return inputs;
}

GradCheckCase DensityLossCase(std::uint64_t seed) {
  DgbConfig cfg;
  cfg.base_channels = 2;
  SplitMix64 rng(seed);
  Tensor image = RandomUniform(rng, {1, 16, 16}, 0.0, 1.0);
  Tensor gt = RandomUniform(rng, {1, 16, 16}, 0.0, 0.2);
  const DgbWeights<Tensor> w = InitDgb(cfg, seed);
  GradCheckCase c;
  c.point = PointOf({}, w);
  c.fn = [cfg, w, image, gt](std::span<const ag::Var> v) {
    return DensityLoss(DgbForward(ag::Constant(image), Unflatten(w, v), cfg),
                       ag::Constant(gt));
  };
  return c;
}

GradCheckCase CalibrationCase(std::uint64_t seed) {
  SplitMix64 rng(seed);
  Tensor density = RandomUniform(rng, {1, 8, 8}, 0.0, 1.0);
  Tensor signs = RandomSigns(rng, {1, 8, 8});
  const CalibrationWeights<Tensor> w = InitCalibration(seed);
  GradCheckCase c;
  c.point = PointOf({density}, w);
  c.fn = [w, signs](std::span<const ag::Var> v) {
    return ag::WeightedSum(CalibrateDensity(v[0], Unflatten(w, v.subspan(1))), signs);
  };
  return c;
}

GradCheckCase ChannelAttentionCase(std::uint64_t seed) {
  SplitMix64 rng(seed);
  Tensor x = RandomNormal(rng, {8, 6, 6});
  Tensor signs = RandomSigns(rng, {8, 6, 6});
  const ChannelAttentionWeights<Tensor> w = InitChannelAttention(8, 4, seed, "ca.");
  GradCheckCase c;
  c.point = PointOf({x}, w);
  c.fn = [w, signs](std::span<const ag::Var> v) {
    return ag::WeightedSum(ChannelAttention(v[0], Unflatten(w, v.subspan(1))), signs);
  };
  return c;
}

GradCheckCase SpatialAttentionCase(std::uint64_t seed) {
  SplitMix64 rng(seed);
  Tensor x = RandomNormal(rng, {4, 9, 9});
  Tensor signs = RandomSigns(rng, {4, 9, 9});
  const SpatialAttentionWeights<Tensor> w = InitSpatialAttention(kDefaultSpatialKernel, seed, "sa.");
  GradCheckCase c;
  c.point = PointOf({x}, w);
  c.fn = [w, signs](std::span<const ag::Var> v) {
    return ag::WeightedSum(SpatialAttention(v[0], Unflatten(w, v.subspan(1))), signs);
  };
  return c;
}

GradCheckCase DafmCase(std::uint64_t seed) {
  DafmConfig cfg;
  cfg.channels = 4;
  SplitMix64 rng(seed);
  Tensor x = RandomNormal(rng, {4, 14, 14});
  Tensor density = RandomUniform(rng, {1, 14, 14}, 0.0, 1.0);
  Tensor signs = RandomSigns(rng, {4, 14, 14});
  const DafmWeights<Tensor> w = InitDafm(cfg, 14, 14, seed);
  // Checked leaves: the attention parameters, then dw and pw. The focus bank
  // stays fixed, as does the region mask.
  GradCheckCase c;
  c.point = PointOf({}, w.ifam);
  c.point.push_back(w.dw);
  c.point.push_back(w.pw);
  c.fn = [cfg, w, x, density, signs](std::span<const ag::Var> v) {
    DafmWeights<ag::Var> wv = Lift(w, /*trainable=*/false);
    const std::size_t n = v.size() - 2;
    wv.ifam = Unflatten(w.ifam, v.first(n));
    wv.dw = v[n];
    wv.pw = v[n + 1];
    return ag::WeightedSum(
        DafmForward(ag::Constant(x), ag::Constant(density), wv, cfg), signs);
  };
  return c;
}

GradCheckCase DffmCase(std::uint64_t seed) {
  DffmConfig cfg;
  cfg.channels = 4;
  SplitMix64 rng(seed);
  Tensor x = SmoothField(rng, {4, 12, 12}, 6.0);
  Tensor density = RandomUniform(rng, {1, 12, 12}, 0.0, 1.0);
  Tensor signs = RandomSigns(rng, {4, 12, 12});
  const DffmWeights<Tensor> w = InitDffm(cfg, seed);
  // Checked leaves: every EDH path's parameters.
  GradCheckCase c;
  for (const auto& path : w.paths) {
    for (const Tensor* t : Flatten(path)) c.point.push_back(*t);
  }
  c.fn = [cfg, w, x, density, signs](std::span<const ag::Var> v) {
    DffmWeights<ag::Var> wv = Lift(w, /*trainable=*/false);
    std::size_t i = 0;
    for (std::size_t p = 0; p < wv.paths.size(); ++p) {
      const std::size_t n = Flatten(w.paths[p]).size();
      wv.paths[p] = Unflatten(w.paths[p], v.subspan(i, n));
      i += n;
    }
    return ag::WeightedSum(
        DffmForward(ag::Constant(x), ag::Constant(density), wv, cfg), signs);
  };
  return c;
}

}  // namespace

std::vector<std::string> GradCheckModules() {
  return {"density-loss", "calibration", "channel-attention", "spatial-attention", "dafm", "dffm"};
}

GradCheckCase MakeGradCheckCase(const std::string& module, std::uint64_t seed) {
  if (module == "density-loss") return DensityLossCase(seed);
  if (module == "calibration") return CalibrationCase(seed);
  if (module == "channel-attention") return ChannelAttentionCase(seed);
  if (module == "spatial-attention") return SpatialAttentionCase(seed);
  if (module == "dafm") return DafmCase(seed);
  if (module == "dffm") return DffmCase(seed);
  throw InvalidArgument("unknown gradcheck module '" + module + "'");
}

}  // namespace densefocus
