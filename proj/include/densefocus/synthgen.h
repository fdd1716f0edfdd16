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
#ifndef DENSEFOCUS_SYNTHGEN_H_
#define DENSEFOCUS_SYNTHGEN_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "densefocus/annotation.h"
#include "densefocus/evalkit.h"
#include "densefocus/tensor.h"

namespace densefocus {

struct SceneSpec {
  std::size_t width = 256;
  std::size_t height = 256;
  std::size_t n_clusters = 2;
  std::size_t objects_min = 10;  // per cluster, inclusive
  std::size_t objects_max = 10;
  std::size_t size_min = 4;      // box side in pixels, inclusive
  std::size_t size_max = 16;
  double cluster_spread = 12.0;  // stddev of object centers around a cluster
  double noise_sigma = 0.05;
  std::int64_t image_id = 1;
  std::uint64_t seed = 0;

  // Throws InvalidArgument on empty ranges, zero sizes or boxes that cannot
  // fit in the image.
  void Validate() const;
};

struct ClusterCenter {
  double x = 0.0;
  double y = 0.0;
};

struct Scene {
  Tensor image;  // [1,H,W]
  std::vector<BBoxAnnotation> annotations;
  std::vector<ClusterCenter> centers;
};

// Cluster centers are uniform over the image less a margin of half the
// largest box; object centers are Gaussian around them and clamped so every
// box lies inside the image. Boxes have integer corners and are painted with
// intensity 1 over a zero background, then Gaussian noise is added to every
// pixel.
Scene GenerateScene(const SceneSpec& spec);

// Noisy detections derived from ground truth: each box is dropped with
// probability `drop_rate`; survivors have x, y, w, h shifted by independent
// uniform offsets in [-jitter_px, jitter_px] (extents kept >= 1) and score
// 1 - mean(|offset|)/jitter_px plus uniform noise in [-score_noise,
// score_noise], clamped to [0, 1].
std::vector<Detection> PerturbDetections(std::span<const BBoxAnnotation> gts,
                                         double jitter_px, double drop_rate,
                                         double score_noise, std::uint64_t seed);

}  // namespace densefocus

#endif  // DENSEFOCUS_SYNTHGEN_H_
