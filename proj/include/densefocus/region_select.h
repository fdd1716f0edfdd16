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
#ifndef DENSEFOCUS_REGION_SELECT_H_
#define DENSEFOCUS_REGION_SELECT_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "densefocus/autodiff.h"
#include "densefocus/density.h"
#include "densefocus/params.h"
#include "densefocus/tensor.h"

namespace densefocus {

// [1,H,W] map whose entries are exactly 0 or 1.
class BinaryMask {
 public:
  BinaryMask() = default;
  // Throws InvalidArgument unless `values` is [1,H,W] with entries in {0,1}.
  explicit BinaryMask(Tensor values);

  static BinaryMask Zeros(std::size_t h, std::size_t w) {
    return BinaryMask(Tensor({1, h, w}));
  }

  const Tensor& values() const { return values_; }
  std::size_t height() const { return values_.dim(1); }
  std::size_t width() const { return values_.dim(2); }
  bool at(std::size_t r, std::size_t c) const {
    return values_.at(0, r, c) != 0.0;
  }
  void set(std::size_t r, std::size_t c, bool on) {
    values_.at(0, r, c) = on ? 1.0 : 0.0;
  }
  std::size_t count() const;

  friend bool operator==(const BinaryMask& a, const BinaryMask& b) {
    return a.values_ == b.values_;
  }

 private:
  Tensor values_;
};

// Inclusive rectangle, 0-based.
struct Rect {
  std::size_t r_min = 0, r_max = 0, c_min = 0, c_max = 0;

  std::size_t area() const { return (r_max - r_min + 1) * (c_max - c_min + 1); }
  friend bool operator==(const Rect&, const Rect&) = default;
};

// At most two rectangles, one per non-empty cluster, cluster 1 first.
struct RegionSet {
  std::vector<Rect> rectangles;

  bool empty() const { return rectangles.empty(); }
};

enum class ThresholdMode { kAbsolute, kQuantile };

struct ThresholdSpec {
  ThresholdMode mode = ThresholdMode::kQuantile;
  // Absolute: tau >= 0. Quantile: fraction p in (0, 1] of pixels to keep.
  double value = 0.10;
};

// Absolute mode keeps D >= tau. Quantile mode keeps every pixel whose value
// is at least the ceil(p*H*W)-th largest (ties included); an all-zero map
// yields an empty mask in quantile mode.
BinaryMask ThresholdMask(const DensityMap& density, const ThresholdSpec& spec);

struct GridPoint {
  std::size_t row = 0, col = 0;
};

struct KMeansOptions {
  std::size_t max_iter = 100;
  double tol = 1e-6;
};

// Lloyd's 2-means over grid points of an h x w map, seeded with the corner
// centroids (0,0) and (h-1,w-1). Returns a label in {1,2} per point. Equal
// distances go to cluster 1; an empty cluster keeps its previous centroid.
// Distances are compared exactly in 128-bit integers; grids beyond about
// 4096 x 4096 are rejected.
std::vector<int> KMeans2(std::span<const GridPoint> points, std::size_t h,
                         std::size_t w, const KMeansOptions& opts = {});

struct RefinedMask {
  BinaryMask mask;
  RegionSet regions;
};

// Clusters the active cells of `mask` into two groups and replaces them with
// the union of the groups' bounding rectangles.
RefinedMask RefineMask(const BinaryMask& mask, const KMeansOptions& opts = {});

// ---------------------------------------------------------------------------
// Focus bank N = conv1x1(avg_pool_7(M' * X)).

inline constexpr std::size_t kFocusPool = 7;

template <class T>
struct FocusBankWeights {
  T w, b;  // [C,C,1,1], [C]

  template <class Self, class F>
  static void Visit(Self& s, F&& f) {
    f("w", s.w);
    f("b", s.b);
  }
  template <class F>
  auto Map(F&& f) const {
    using U = decltype(f(w));
    return FocusBankWeights<U>{f(w), f(b)};
  }
};

FocusBankWeights<Tensor> InitFocusBank(std::size_t channels, std::uint64_t seed,
                                       const std::string& name);

// Output is [C, ceil(H/7), ceil(W/7)].
ag::Var FocusBank(const ag::Var& features, const ag::Var& mask,
                  const FocusBankWeights<ag::Var>& w);
Tensor FocusBank(const Tensor& features, const BinaryMask& mask,
                 const FocusBankWeights<Tensor>& w);

}  // namespace densefocus

#endif  // DENSEFOCUS_REGION_SELECT_H_
