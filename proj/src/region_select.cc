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
#include "densefocus/region_select.h"

#include <algorithm>
#include <cmath>
#include <functional>

#include "densefocus/errors.h"
#include "densefocus/ops.h"

namespace densefocus {

BinaryMask::BinaryMask(Tensor values) : values_(std::move(values)) {
  if (values_.rank() != 3 || values_.dim(0) != 1) {
    throw InvalidArgument("binary mask must be [1,H,W], got " +
                          ShapeToString(values_.shape()));
  }
  for (double v : values_.data()) {
    if (v != 0.0 && v != 1.0) {
      throw InvalidArgument("binary mask entries must be 0 or 1");
    }
  }
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(
      std::count(values_.vec().begin(), values_.vec().end(), 1.0));
}

BinaryMask ThresholdMask(const DensityMap& density, const ThresholdSpec& spec) {
  const Tensor& d = density.values();
  Tensor m(d.shape());
  double tau = 0.0;
  if (spec.mode == ThresholdMode::kAbsolute) {
    if (!(spec.value >= 0.0) || !std::isfinite(spec.value)) {
      throw InvalidArgument("absolute threshold must be finite and >= 0");
    }
    tau = spec.value;
  } else {
    if (!(spec.value > 0.0 && spec.value <= 1.0)) {
      throw InvalidArgument("quantile fraction must lie in (0, 1], got " +
                            std::to_string(spec.value));
    }
    if (d.Max() == 0.0) return BinaryMask(std::move(m));
    const std::size_t n = d.size();
    auto keep = static_cast<std::size_t>(
        std::ceil(spec.value * static_cast<double>(n) - 1e-9));
    keep = std::clamp<std::size_t>(keep, 1, n);
    std::vector<double> sorted = d.vec();
    std::nth_element(sorted.begin(), sorted.begin() + (keep - 1), sorted.end(),
                     std::greater<>());
    tau = sorted[keep - 1];
  }
  for (std::size_t i = 0; i < d.size(); ++i) m[i] = d[i] >= tau ? 1.0 : 0.0;
  return BinaryMask(std::move(m));
}

namespace {

// Scaled distances reach (h^2 + w^2) n^2 and are multiplied by another n^2,
// with n <= h*w points; keep that below 2^125.
bool FitsExactDistances(std::size_t h, std::size_t w) {
  const double side = std::log2(static_cast<double>(std::max(h, w)));
  const double cells = std::log2(static_cast<double>(h)) + std::log2(static_cast<double>(w));
  return 2.0 * side + 1.0 + 4.0 * cells < 125.0;
}

}  // namespace

std::vector<int> KMeans2(std::span<const GridPoint> points, std::size_t h,
                         std::size_t w, const KMeansOptions& opts) {
  if (points.empty()) throw InvalidArgument("KMeans2: empty point set");
  if (h == 0 || w == 0) throw InvalidArgument("KMeans2: empty grid");
  if (!FitsExactDistances(h, w)) {
    throw InvalidArgument("KMeans2: " + std::to_string(h) + "x" + std::to_string(w) +
                          " grid is too large for exact distance comparison");
  }
  // Centroid k is (sum_r / n, sum_c / n) held exactly, so equal distances
  // compare equal and the tie rule is honoured.
  struct Centroid {
    std::int64_t sum_r, sum_c, n;
  };
  Centroid c[2] = {{0, 0, 1},
                   {static_cast<std::int64_t>(h - 1), static_cast<std::int64_t>(w - 1), 1}};
  // |p - S/n|^2 * n^2.
  auto scaled_dist = [](const GridPoint& p, const Centroid& k) {
    const __int128 dr = static_cast<__int128>(p.row) * k.n - k.sum_r;
    const __int128 dc = static_cast<__int128>(p.col) * k.n - k.sum_c;
    return dr * dr + dc * dc;
  };
  std::vector<int> labels(points.size(), 1);
  for (std::size_t iter = 0; iter < opts.max_iter; ++iter) {
    Centroid next[2] = {{0, 0, 0}, {0, 0, 0}};
    for (std::size_t i = 0; i < points.size(); ++i) {
      const __int128 n0 = c[0].n, n1 = c[1].n;
      const int k = scaled_dist(points[i], c[0]) * n1 * n1 <=
                            scaled_dist(points[i], c[1]) * n0 * n0
                        ? 0
                        : 1;
      labels[i] = k + 1;
      next[k].sum_r += static_cast<std::int64_t>(points[i].row);
      next[k].sum_c += static_cast<std::int64_t>(points[i].col);
      ++next[k].n;
    }
    double shift = 0.0;
    for (int k = 0; k < 2; ++k) {
      if (next[k].n == 0) continue;
      auto coord = [](std::int64_t sum, std::int64_t n) {
        return static_cast<double>(sum) / static_cast<double>(n);
      };
      shift = std::max(shift, std::hypot(coord(next[k].sum_r, next[k].n) -
                                             coord(c[k].sum_r, c[k].n),
                                         coord(next[k].sum_c, next[k].n) -
                                             coord(c[k].sum_c, c[k].n)));
      c[k] = next[k];
    }
    if (shift <= opts.tol) break;
  }
  return labels;
}

RefinedMask RefineMask(const BinaryMask& mask, const KMeansOptions& opts) {
  const std::size_t h = mask.height(), w = mask.width();
  std::vector<GridPoint> points;
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      if (mask.at(r, c)) points.push_back({r, c});
    }
  }
  RefinedMask out{BinaryMask::Zeros(h, w), {}};
  if (points.empty()) return out;

  const std::vector<int> labels = KMeans2(points, h, w, opts);
  for (int k = 1; k <= 2; ++k) {
    bool any = false;
    Rect rect;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (labels[i] != k) continue;
      const GridPoint& p = points[i];
      if (!any) {
        rect = {p.row, p.row, p.col, p.col};
        any = true;
      } else {
        rect.r_min = std::min(rect.r_min, p.row);
        rect.r_max = std::max(rect.r_max, p.row);
        rect.c_min = std::min(rect.c_min, p.col);
        rect.c_max = std::max(rect.c_max, p.col);
      }
    }
    if (any) out.regions.rectangles.push_back(rect);
  }
  for (const Rect& rect : out.regions.rectangles) {
    for (std::size_t r = rect.r_min; r <= rect.r_max; ++r) {
      for (std::size_t c = rect.c_min; c <= rect.c_max; ++c) out.mask.set(r, c, true);
    }
  }
  return out;
}

FocusBankWeights<Tensor> InitFocusBank(std::size_t channels, std::uint64_t seed,
                                       const std::string& name) {
  return {InitUniform(seed, name + "w", {channels, channels, 1, 1}, channels),
          InitUniform(seed, name + "b", {channels}, channels)};
}

ag::Var FocusBank(const ag::Var& features, const ag::Var& mask,
                  const FocusBankWeights<ag::Var>& w) {
  RequireChw(features.value(), "FocusBank features");
  const Shape& ms = mask.shape();
  if (ms.size() != 3 || ms[0] != 1 || ms[1] != features.shape()[1] ||
      ms[2] != features.shape()[2]) {
    throw InvalidArgument("FocusBank: mask " + ShapeToString(ms) +
                          " does not match features " +
                          ShapeToString(features.shape()));
  }
  ag::Var pooled = ag::AvgPool(ag::MulChannels(features, mask), kFocusPool);
  return ag::Conv2d(pooled, w.w, w.b, 1, 0);
}

Tensor FocusBank(const Tensor& features, const BinaryMask& mask,
                 const FocusBankWeights<Tensor>& w) {
  return FocusBank(ag::Constant(features), ag::Constant(mask.values()),
                   Lift(w, false))
      .value();
}

}  // namespace densefocus
