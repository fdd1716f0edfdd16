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
#include "densefocus/synthgen.h"

#include <algorithm>
#include <cmath>

#include "densefocus/errors.h"
#include "densefocus/rng.h"

namespace densefocus {

void SceneSpec::Validate() const {
  if (width == 0 || height == 0) throw InvalidArgument("scene extents must be >= 1");
  if (objects_min > objects_max) throw InvalidArgument("empty objects-per-cluster range");
  if (size_min == 0 || size_min > size_max) {
    throw InvalidArgument("object sizes must be a non-empty range of values >= 1");
  }
  if (size_max > width || size_max > height) {
    throw InvalidArgument("objects larger than the image");
  }
  if (!(cluster_spread >= 0.0) || !std::isfinite(cluster_spread)) {
    throw InvalidArgument("cluster_spread must be finite and >= 0");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw InvalidArgument("noise_sigma must be finite and >= 0");
  }
}

Scene GenerateScene(const SceneSpec& spec) {
  spec.Validate();
  const double w_img = static_cast<double>(spec.width);
  const double h_img = static_cast<double>(spec.height);
  const double margin = static_cast<double>(spec.size_max) / 2.0;

  SplitMix64 rng(spec.seed);
  Scene scene;
  scene.image = Tensor::Zeros({1, spec.height, spec.width});
  for (std::size_t k = 0; k < spec.n_clusters; ++k) {
    scene.centers.push_back({rng.Uniform(margin, w_img - margin),
                             rng.Uniform(margin, h_img - margin)});
  }

  std::int64_t next_id = 1;
  for (const ClusterCenter& c : scene.centers) {
    const auto count = static_cast<std::size_t>(
        rng.UniformInt(static_cast<std::int64_t>(spec.objects_min),
                       static_cast<std::int64_t>(spec.objects_max)));
    for (std::size_t i = 0; i < count; ++i) {
      const auto bw = static_cast<std::size_t>(rng.UniformInt(
          static_cast<std::int64_t>(spec.size_min), static_cast<std::int64_t>(spec.size_max)));
      const auto bh = static_cast<std::size_t>(rng.UniformInt(
          static_cast<std::int64_t>(spec.size_min), static_cast<std::int64_t>(spec.size_max)));
      const double cx = rng.Normal(c.x, spec.cluster_spread);
      const double cy = rng.Normal(c.y, spec.cluster_spread);
      const double x = std::clamp(std::round(cx - static_cast<double>(bw) / 2.0), 0.0,
                                  static_cast<double>(spec.width - bw));
      const double y = std::clamp(std::round(cy - static_cast<double>(bh) / 2.0), 0.0,
                                  static_cast<double>(spec.height - bh));
      const auto x0 = static_cast<std::size_t>(x);
      const auto y0 = static_cast<std::size_t>(y);
      for (std::size_t r = y0; r < y0 + bh; ++r) {
        for (std::size_t col = x0; col < x0 + bw; ++col) scene.image.at(0, r, col) = 1.0;
      }
      BBoxAnnotation a = BBoxAnnotation::FromBox(
          spec.image_id, 1, Box{x, y, static_cast<double>(bw), static_cast<double>(bh)});
      a.id = next_id++;
      scene.annotations.push_back(a);
    }
  }

  if (spec.noise_sigma > 0.0) {
    SplitMix64 noise(spec.seed ^ HashName("synthgen.noise"));
    for (double& v : scene.image.data()) v += noise.Normal(0.0, spec.noise_sigma);
  }
  return scene;
}

std::vector<Detection> PerturbDetections(std::span<const BBoxAnnotation> gts,
                                         double jitter_px, double drop_rate,
                                         double score_noise, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<Detection> dets;
  for (const BBoxAnnotation& g : gts) {
    // Every box consumes the same number of draws, dropped or not.
    const bool drop = rng.Uniform() < drop_rate;
    double offsets[4];
    for (double& o : offsets) o = rng.Uniform(-jitter_px, jitter_px);
    const double noise = rng.Uniform(-score_noise, score_noise);
    if (drop) continue;

    const Box b = g.box();
    Detection d;
    d.image_id = g.image_id;
    d.category_id = g.category_id;
    d.bbox = Box{b.x + offsets[0], b.y + offsets[1], std::max(1.0, b.w + offsets[2]),
                 std::max(1.0, b.h + offsets[3])};
    double spread = 0.0;
    if (jitter_px > 0.0) {
      for (double o : offsets) spread += std::abs(o);
      spread /= 4.0 * jitter_px;
    }
    d.score = std::clamp(1.0 - spread + noise, 0.0, 1.0);
    dets.push_back(d);
  }
  return dets;
}

}  // namespace densefocus
