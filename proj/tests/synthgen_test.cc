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

#include <cmath>

#include <gtest/gtest.h>

#include "densefocus/density.h"
#include "densefocus/errors.h"
#include "densefocus/synthgen.h"
#include "oracles.h"

namespace densefocus {
namespace {

SceneSpec DefaultSpec(std::uint64_t seed) {
  SceneSpec s;
  s.seed = seed;
  return s;
}

TEST(GenerateScene, NoClustersIsPureNoise) {
  SceneSpec s = DefaultSpec(1);
  s.n_clusters = 0;
  const Scene sc = GenerateScene(s);
  EXPECT_TRUE(sc.annotations.empty());
  EXPECT_TRUE(sc.centers.empty());
  double sum = 0.0, sq = 0.0;
  for (double v : sc.image.vec()) {
    sum += v;
    sq += v * v;
  }
  const double n = static_cast<double>(sc.image.size());
  EXPECT_NEAR(sum / n, 0.0, 0.002);
  EXPECT_NEAR(std::sqrt(sq / n), 0.05, 0.002);
}

TEST(GenerateScene, IsDeterministic) {
  const Scene a = GenerateScene(DefaultSpec(11));
  const Scene b = GenerateScene(DefaultSpec(11));
  EXPECT_EQ(a.image, b.image);
  ASSERT_EQ(a.annotations.size(), b.annotations.size());
  for (std::size_t i = 0; i < a.annotations.size(); ++i) {
    EXPECT_EQ(a.annotations[i].cx, b.annotations[i].cx);
    EXPECT_EQ(a.annotations[i].cy, b.annotations[i].cy);
    EXPECT_EQ(a.annotations[i].w, b.annotations[i].w);
    EXPECT_EQ(a.annotations[i].h, b.annotations[i].h);
  }
  EXPECT_NE(GenerateScene(DefaultSpec(12)).image, a.image);
}

TEST(GenerateScene, CountContract) {
  const Scene sc = GenerateScene(DefaultSpec(7));
  EXPECT_EQ(sc.image.shape(), (Shape{1, 256, 256}));
  EXPECT_EQ(sc.annotations.size(), 20u);
  EXPECT_EQ(sc.centers.size(), 2u);
}

TEST(GenerateScene, ObjectCountsStayInRange) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SceneSpec s = DefaultSpec(seed);
    s.n_clusters = 3;
    s.objects_min = 2;
    s.objects_max = 9;
    const std::size_t n = GenerateScene(s).annotations.size();
    EXPECT_GE(n, 6u);
    EXPECT_LE(n, 27u);
  }
}

TEST(GenerateScene, BoxesLieInsideImage) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    SceneSpec s = DefaultSpec(seed);
    s.width = 64 + seed * 3;
    s.height = 48 + seed * 5;
    s.n_clusters = 1 + seed % 4;
    s.cluster_spread = 30.0;
    for (const BBoxAnnotation& a : GenerateScene(s).annotations) {
      const Box b = a.box();
      EXPECT_GE(b.x, 0.0);
      EXPECT_GE(b.y, 0.0);
      EXPECT_LE(b.x + b.w, static_cast<double>(s.width));
      EXPECT_LE(b.y + b.h, static_cast<double>(s.height));
      EXPECT_GE(b.w, 4.0);
      EXPECT_LE(b.w, 16.0);
      EXPECT_EQ(b.x, std::floor(b.x));
      EXPECT_EQ(b.w, std::floor(b.w));
    }
  }
}

TEST(GenerateScene, DensityConcentratesNearClusters) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SceneSpec s = DefaultSpec(seed);
    s.n_clusters = 1 + seed % 3;
    const Scene sc = GenerateScene(s);
    const Tensor d = GtDensity(sc.annotations, s.height, s.width).density.values();
    const double r = 3.0 * s.cluster_spread;
    double inside = 0.0, total = 0.0;
    for (std::size_t y = 0; y < s.height; ++y) {
      for (std::size_t x = 0; x < s.width; ++x) {
        const double v = d.at(0, y, x);
        total += v;
        for (const ClusterCenter& c : sc.centers) {
          if (std::hypot(x + 0.5 - c.x, y + 0.5 - c.y) <= r) {
            inside += v;
            break;
          }
        }
      }
    }
    EXPECT_GE(inside, 0.9 * total) << "seed " << seed;
  }
}

TEST(GenerateScene, RendersBoxesOverBackground) {
  SceneSpec s = DefaultSpec(5);
  s.noise_sigma = 0.0;
  const Scene sc = GenerateScene(s);
  for (const BBoxAnnotation& a : sc.annotations) {
    const Box b = a.box();
    EXPECT_EQ(sc.image.at(0, static_cast<std::size_t>(b.y), static_cast<std::size_t>(b.x)), 1.0);
  }
  for (double v : sc.image.vec()) EXPECT_TRUE(v == 0.0 || v == 1.0);
}

TEST(SceneSpec, RejectsInfeasibleSpecs) {
  SceneSpec s = DefaultSpec(1);
  s.size_max = 300;
  EXPECT_THROW(GenerateScene(s), InvalidArgument);
  s = DefaultSpec(1);
  s.size_min = 0;
  EXPECT_THROW(s.Validate(), InvalidArgument);
  s = DefaultSpec(1);
  s.objects_min = 5;
  s.objects_max = 4;
  EXPECT_THROW(s.Validate(), InvalidArgument);
  s = DefaultSpec(1);
  s.size_min = 9;
  s.size_max = 8;
  EXPECT_THROW(s.Validate(), InvalidArgument);
  s = DefaultSpec(1);
  s.width = 0;
  EXPECT_THROW(s.Validate(), InvalidArgument);
  EXPECT_NO_THROW(DefaultSpec(1).Validate());
}

TEST(PerturbDetections, DropAll) {
  const Scene sc = GenerateScene(DefaultSpec(7));
  EXPECT_TRUE(PerturbDetections(sc.annotations, 2.0, 1.0, 0.05, 1).empty());
}

TEST(PerturbDetections, NoNoiseIsPerfect) {
  const Scene sc = GenerateScene(DefaultSpec(7));
  const std::vector<Detection> d = PerturbDetections(sc.annotations, 0.0, 0.0, 0.0, 1);
  ASSERT_EQ(d.size(), sc.annotations.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(d[i].bbox, sc.annotations[i].box());
    EXPECT_EQ(d[i].score, 1.0);
  }
  const APReport r = ApReport(d, sc.annotations);
  EXPECT_EQ(r.ap, 1.0);
  EXPECT_EQ(r.ap50, 1.0);
}

TEST(PerturbDetections, DeterministicAndBounded) {
  const Scene sc = GenerateScene(DefaultSpec(9));
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::vector<Detection> a = PerturbDetections(sc.annotations, 3.0, 0.3, 0.1, seed);
    const std::vector<Detection> b = PerturbDetections(sc.annotations, 3.0, 0.3, 0.1, seed);
    ASSERT_EQ(a.size(), b.size());
    EXPECT_LE(a.size(), sc.annotations.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].bbox, b[i].bbox);
      EXPECT_EQ(a[i].score, b[i].score);
      EXPECT_GE(a[i].score, 0.0);
      EXPECT_LE(a[i].score, 1.0);
      EXPECT_GE(a[i].bbox.w, 1.0);
      EXPECT_GE(a[i].bbox.h, 1.0);
    }
  }
}

// Values first computed with the brute-force staircase evaluator.
TEST(PerturbDetections, PinnedJitteredScene) {
  const Scene sc = GenerateScene(DefaultSpec(7));
  const std::vector<Detection> d = PerturbDetections(sc.annotations, 2.0, 0.2, 0.05, 3);
  EXPECT_EQ(d.size(), 17u);
  constexpr double kAp = 0.21012601260126015, kAp50 = 0.50825082508250874;
  const APReport r = ApReport(d, sc.annotations);
  EXPECT_NEAR(r.ap, kAp, 1e-12);
  EXPECT_NEAR(r.ap50, kAp50, 1e-12);
  EXPECT_NEAR(oracle::ApAt(d, sc.annotations, 0.5, kAreaAll, kDefaultMaxDets), kAp50, 1e-12);
}

}  // namespace
}  // namespace densefocus
