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

#include "densefocus/errors.h"
#include "densefocus/train.h"

namespace densefocus {
namespace {

TEST(TrainingCorpus, ShapesAndDeterminism) {
  TrainDemoConfig cfg;
  const std::vector<TrainingExample> a = MakeTrainingCorpus(cfg);
  const std::vector<TrainingExample> b = MakeTrainingCorpus(cfg);
  ASSERT_EQ(a.size(), 8u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].image.shape(), (Shape{1, 64, 64}));
    EXPECT_EQ(a[i].target.values().shape(), (Shape{1, 64, 64}));
    EXPECT_GT(a[i].target.mass(), 0.0);
    EXPECT_EQ(a[i].image, b[i].image);
    EXPECT_EQ(a[i].target.values(), b[i].target.values());
  }
  EXPECT_NE(a[0].image, a[1].image);
  cfg.seed = 8;
  EXPECT_NE(MakeTrainingCorpus(cfg)[0].image, a[0].image);
}

TEST(TrainDemo, ShortRunIsDeterministicAndDescends) {
  TrainDemoConfig cfg;
  cfg.steps = 5;
  const TrainTrace a = TrainDemo(cfg);
  const TrainTrace b = TrainDemo(cfg);
  ASSERT_EQ(a.losses.size(), 6u);
  EXPECT_EQ(a.losses, b.losses);
  for (double l : a.losses) EXPECT_TRUE(std::isfinite(l));
  EXPECT_LT(a.losses.back(), a.losses.front());
}

TEST(TrainDemo, RejectsBadLearningRate) {
  TrainDemoConfig cfg;
  cfg.lr = -0.1;
  EXPECT_THROW(TrainDemo(cfg), InvalidArgument);
  cfg.lr = std::nan("");
  EXPECT_THROW(TrainDemo(cfg), InvalidArgument);
}

TEST(TraceCsv, Format) {
  EXPECT_EQ(TraceCsv({1.0, 0.5}), "step,loss\n0,1\n1,0.5\n");
  EXPECT_EQ(TraceCsv({0.1}), "step,loss\n0,0.10000000000000001\n");
}

}  // namespace
}  // namespace densefocus
