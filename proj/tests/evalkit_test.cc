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

#include <random>

#include <gtest/gtest.h>

#include "densefocus/errors.h"
#include "densefocus/evalkit.h"
#include "eval_cases.h"

namespace densefocus {
namespace {

BBoxAnnotation Gt(std::int64_t id, std::int64_t image, std::int64_t cat, Box b) {
  BBoxAnnotation a = BBoxAnnotation::FromBox(image, cat, b);
  a.id = id;
  return a;
}

Detection Det(std::int64_t image, std::int64_t cat, Box b, double score) {
  return Detection{image, cat, b, score};
}

std::vector<Detection> Perfect(const std::vector<BBoxAnnotation>& gts) {
  std::vector<Detection> d;
  for (const auto& g : gts) {
    d.push_back(Det(g.image_id, g.category_id, {g.cx - g.w / 2, g.cy - g.h / 2, g.w, g.h}, 1.0));
  }
  return d;
}

TEST(Iou, Examples) {
  EXPECT_DOUBLE_EQ(Iou({0, 0, 2, 2}, {1, 0, 2, 2}), 2.0 / 6.0);
  EXPECT_EQ(Iou({3, 4, 5, 6}, {3, 4, 5, 6}), 1.0);
  EXPECT_EQ(Iou({0, 0, 2, 2}, {5, 5, 1, 1}), 0.0);
  EXPECT_EQ(Iou({0, 0, 2, 2}, {2, 0, 2, 2}), 0.0);
}

TEST(Iou, IsSymmetricAndBounded) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 10.0), s(0.5, 6.0);
  for (int i = 0; i < 500; ++i) {
    const Box a{u(rng), u(rng), s(rng), s(rng)}, b{u(rng), u(rng), s(rng), s(rng)};
    const double v = Iou(a, b);
    EXPECT_EQ(v, Iou(b, a));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Iou, RejectsNonPositiveExtents) {
  EXPECT_THROW(Iou({0, 0, 0, 2}, {0, 0, 1, 1}), InvalidArgument);
  EXPECT_THROW(Iou({0, 0, 1, 1}, {0, 0, 1, -1}), InvalidArgument);
}

TEST(MatchDetections, SingleExactHit) {
  const std::vector<BBoxAnnotation> gts = {Gt(1, 1, 1, {0, 0, 4, 4})};
  const MatchResult m = MatchDetections(Perfect(gts), gts, 0.5, 100);
  EXPECT_EQ(m.tp, 1u);
  EXPECT_EQ(m.fp, 0u);
  EXPECT_EQ(m.fn, 0u);
}

TEST(MatchDetections, NoDetections) {
  const std::vector<BBoxAnnotation> gts = {Gt(1, 1, 1, {0, 0, 4, 4}), Gt(2, 1, 1, {9, 9, 4, 4})};
  const MatchResult m = MatchDetections({}, gts, 0.5, 100);
  EXPECT_EQ(m.fn, 2u);
  EXPECT_EQ(m.tp + m.fp, 0u);
}

TEST(MatchDetections, HigherScoreWinsSharedTruth) {
  const std::vector<BBoxAnnotation> gts = {Gt(1, 1, 1, {2, 2, 4, 4})};
  const std::vector<Detection> dets = {Det(1, 1, {2, 2, 4, 4}, 0.8), Det(1, 1, {2, 2, 4, 4}, 0.9)};
  const MatchResult m = MatchDetections(dets, gts, 0.5, 100);
  EXPECT_EQ(m.detections[0], DetOutcome::kFalsePositive);
  EXPECT_EQ(m.detections[1], DetOutcome::kTruePositive);
  EXPECT_EQ(m.tp, 1u);
  EXPECT_EQ(m.fp, 1u);
  EXPECT_TRUE(m.gt_matched[0]);
}

TEST(MatchDetections, EqualScoresKeepInputOrder) {
  const std::vector<BBoxAnnotation> gts = {Gt(1, 1, 1, {2, 2, 4, 4})};
  const std::vector<Detection> dets = {Det(1, 1, {2, 2, 4, 4}, 0.5), Det(1, 1, {2, 2, 4, 4}, 0.5)};
  const MatchResult m = MatchDetections(dets, gts, 0.5, 100);
  EXPECT_EQ(m.detections[0], DetOutcome::kTruePositive);
  EXPECT_EQ(m.detections[1], DetOutcome::kFalsePositive);
}

TEST(MatchDetections, CategoriesAndImagesDoNotMix) {
  const std::vector<BBoxAnnotation> gts = {Gt(1, 1, 1, {0, 0, 4, 4})};
  const std::vector<Detection> dets = {Det(1, 2, {0, 0, 4, 4}, 0.9), Det(2, 1, {0, 0, 4, 4}, 0.9)};
  const MatchResult m = MatchDetections(dets, gts, 0.5, 100);
  EXPECT_EQ(m.tp, 0u);
  EXPECT_EQ(m.fp, 2u);
  EXPECT_EQ(m.fn, 1u);
}

TEST(MatchDetections, CapTruncatesPerImage) {
  const std::vector<BBoxAnnotation> gts = {Gt(1, 1, 1, {0, 0, 4, 4}), Gt(2, 1, 1, {10, 0, 4, 4}),
                                           Gt(3, 1, 1, {20, 0, 4, 4})};
  std::vector<Detection> dets = Perfect(gts);
  dets[2].score = 0.3;
  const MatchResult m = MatchDetections(dets, gts, 0.5, 2);
  EXPECT_EQ(m.detections[2], DetOutcome::kTruncated);
  EXPECT_EQ(m.tp, 2u);
  EXPECT_EQ(m.fn, 1u);
  EXPECT_FALSE(m.gt_matched[2]);
}

TEST(AveragePrecision, Examples) {
  EXPECT_EQ(AveragePrecision({true, true, true}, 3), 1.0);
  EXPECT_EQ(AveragePrecision({false, false}, 3), 0.0);
  EXPECT_EQ(AveragePrecision({}, 3), 0.0);
  EXPECT_EQ(AveragePrecision({true}, 0), kNoGroundTruth);
}

TEST(AveragePrecision, InterleavedFalsePositive) {
  // Precision 1 up to recall 0.5 (51 grid points), 2/3 up to recall 1 (50).
  const double expected = (51.0 * 1.0 + 50.0 * (2.0 / 3.0)) / 101.0;
  EXPECT_NEAR(AveragePrecision({true, false, true}, 2), expected, 1e-15);
}

TEST(AveragePrecision, TrailingFalsePositivesDoNotCount) {
  EXPECT_EQ(AveragePrecision({true, true, false, false}, 2), 1.0);
  // Half recall at full precision.
  EXPECT_NEAR(AveragePrecision({true}, 2), 51.0 / 101.0, 1e-15);
}

TEST(ApReport, PerfectDetections) {
  const std::vector<BBoxAnnotation> gts = {
      Gt(1, 1, 1, {0, 0, 5, 5}), Gt(2, 1, 1, {20, 20, 12, 10}), Gt(3, 2, 2, {5, 5, 20, 20}),
      Gt(4, 2, 1, {50, 50, 40, 40})};
  const APReport r = ApReport(Perfect(gts), gts);
  for (double v : {r.ap, r.ap50, r.ap75, r.ap_vt, r.ap_t, r.ap_s, r.ap_m}) EXPECT_EQ(v, 1.0);
  EXPECT_EQ(r.tp, 4u);
  EXPECT_EQ(r.fp + r.fn, 0u);
  ASSERT_EQ(r.per_category.size(), 2u);
  EXPECT_EQ(r.per_category[0], (std::pair<std::int64_t, double>{1, 1.0}));
  EXPECT_EQ(r.per_category[1], (std::pair<std::int64_t, double>{2, 1.0}));
}

TEST(ApReport, EmptyBucketsAreSentinels) {
  const std::vector<BBoxAnnotation> gts = {Gt(1, 1, 1, {0, 0, 10, 10})};
  const APReport r = ApReport(Perfect(gts), gts);
  EXPECT_EQ(r.ap_t, 1.0);
  EXPECT_EQ(r.ap_vt, kNoGroundTruth);
  EXPECT_EQ(r.ap_s, kNoGroundTruth);
  EXPECT_EQ(r.ap_m, kNoGroundTruth);
}

TEST(ApReport, NoDetections) {
  const std::vector<BBoxAnnotation> gts = {Gt(1, 1, 1, {0, 0, 5, 5}), Gt(2, 1, 1, {20, 20, 40, 40})};
  const APReport r = ApReport({}, gts);
  for (double v : {r.ap, r.ap50, r.ap75, r.ap_vt, r.ap_m}) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(r.fn, 2u);
  EXPECT_EQ(r.tp + r.fp, 0u);
}

TEST(ApReport, NoGroundTruth) {
  const std::vector<Detection> dets = {Det(1, 1, {0, 0, 3, 3}, 0.5)};
  const APReport r = ApReport(dets, {});
  for (double v : {r.ap, r.ap50, r.ap75, r.ap_vt, r.ap_t, r.ap_s, r.ap_m}) {
    EXPECT_EQ(v, kNoGroundTruth);
  }
  EXPECT_EQ(r.fp, 1u);
}

TEST(ApReport, DetectionsOutsideBucketAreIgnored) {
  // A large unmatched detection is not a false positive for the very-tiny bucket.
  const std::vector<BBoxAnnotation> gts = {Gt(1, 1, 1, {0, 0, 4, 4})};
  std::vector<Detection> dets = Perfect(gts);
  dets[0].score = 0.5;
  dets.push_back(Det(1, 1, {100, 100, 50, 50}, 0.9));
  const APReport r = ApReport(dets, gts);
  EXPECT_EQ(r.ap_vt, 1.0);
  EXPECT_LT(r.ap50, 1.0);
}

TEST(AreaRange, BucketsPartitionPositiveAreas) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(1e-3, 60.0);
  std::vector<double> areas = {1e-9, 63.999999, 64.0, 256.0, 1023.9, 1024.0, 1e9};
  for (int i = 0; i < 2000; ++i) areas.push_back(u(rng) * u(rng));
  for (double a : areas) {
    const int hits = kAreaVeryTiny.contains(a) + kAreaTiny.contains(a) +
                     kAreaSmall.contains(a) + kAreaMedium.contains(a);
    EXPECT_EQ(hits, 1) << a;
    EXPECT_TRUE(kAreaAll.contains(a));
  }
}

using Scene = test_support::EvalScene;
using test_support::RandomEvalScene;

TEST(ApReport, MatchesStaircaseOracle) {
  for (std::uint64_t seed = 1; seed <= 400; ++seed) {
    const Scene s = RandomEvalScene(seed);
    EvalOptions opts;
    opts.max_dets = seed % 3 == 0 ? 4 : kDefaultMaxDets;
    EXPECT_LE(test_support::OracleReportGap(s, ApReport(s.dets, s.gts, opts), opts.max_dets),
              1e-12)
        << "seed " << seed;
  }
}

TEST(ApReport, ValuesAreInRange) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const Scene s = RandomEvalScene(seed + 1000);
    const APReport r = ApReport(s.dets, s.gts);
    for (double v : {r.ap, r.ap50, r.ap75, r.ap_vt, r.ap_t, r.ap_s, r.ap_m}) {
      EXPECT_TRUE(v == kNoGroundTruth || (v >= 0.0 && v <= 1.0)) << v;
    }
  }
}

void ExpectSameReport(const APReport& a, const APReport& b) {
  EXPECT_EQ(a.ap, b.ap);
  EXPECT_EQ(a.ap50, b.ap50);
  EXPECT_EQ(a.ap75, b.ap75);
  EXPECT_EQ(a.ap_vt, b.ap_vt);
  EXPECT_EQ(a.ap_t, b.ap_t);
  EXPECT_EQ(a.ap_s, b.ap_s);
  EXPECT_EQ(a.ap_m, b.ap_m);
  EXPECT_EQ(a.tp, b.tp);
  EXPECT_EQ(a.fp, b.fp);
  EXPECT_EQ(a.fn, b.fn);
  EXPECT_EQ(a.per_category, b.per_category);
}

TEST(ApReport, ScoreScaleInvariance) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Scene s = RandomEvalScene(seed + 2000);
    const APReport base = ApReport(s.dets, s.gts);
    for (double k : {0.5, 0.25, 8.0}) {
      std::vector<Detection> scaled = s.dets;
      for (auto& d : scaled) d.score *= k;
      ExpectSameReport(ApReport(scaled, s.gts), base);
    }
  }
}

// Ground truths on a coarse grid never overlap, so each detection can only
// ever compete for one of them.
Scene SeparatedScene(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0), jitter(-4.0, 4.0);
  Scene s;
  for (int i = 0; i < 8; ++i) {
    const double w = 2.0 + 40.0 * u(rng), h = 2.0 + 40.0 * u(rng);
    s.gts.push_back(Gt(i + 1, 1, 1, {100.0 * i, 0.0, w, h}));
  }
  for (const auto& g : s.gts) {
    if (u(rng) < 0.4) continue;
    s.dets.push_back(Det(1, 1, {g.cx - g.w / 2 + jitter(rng), g.cy - g.h / 2 + jitter(rng), g.w, g.h},
                         0.2 + 0.8 * u(rng)));
  }
  return s;
}

TEST(ApReport, AddingTruePositiveNeverLowersAp) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const Scene s = SeparatedScene(seed);
    const APReport base = ApReport(s.dets, s.gts);
    const MatchResult m = MatchDetections(s.dets, s.gts, 0.5, kDefaultMaxDets);
    for (std::size_t g = 0; g < s.gts.size(); ++g) {
      if (m.gt_matched[g]) continue;
      for (double score : {0.1, 0.5, 0.99}) {
        std::vector<Detection> more = s.dets;
        more.push_back(Perfect({s.gts[g]})[0]);
        more.back().score = score;
        const APReport r = ApReport(more, s.gts);
        EXPECT_GE(r.ap, base.ap);
        EXPECT_GE(r.ap50, base.ap50);
        EXPECT_GE(r.ap75, base.ap75);
        EXPECT_GE(r.ap_vt, base.ap_vt);
        EXPECT_GE(r.ap_t, base.ap_t);
        EXPECT_GE(r.ap_s, base.ap_s);
        EXPECT_GE(r.ap_m, base.ap_m);
      }
    }
  }
}

TEST(ApReport, LowScoredFalsePositivesChangeNothing) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const Scene s = SeparatedScene(seed + 500);
    const APReport base = ApReport(s.dets, s.gts);
    std::vector<Detection> more = s.dets;
    more.push_back(Det(1, 1, {50.0, 500.0, 6.0, 6.0}, 0.01));
    more.push_back(Det(1, 1, {250.0, 500.0, 30.0, 30.0}, 0.005));
    const APReport r = ApReport(more, s.gts);
    EXPECT_EQ(r.ap, base.ap);
    EXPECT_EQ(r.ap50, base.ap50);
    EXPECT_EQ(r.ap75, base.ap75);
    EXPECT_EQ(r.ap_vt, base.ap_vt);
    EXPECT_EQ(r.ap_t, base.ap_t);
    EXPECT_EQ(r.ap_s, base.ap_s);
    EXPECT_EQ(r.ap_m, base.ap_m);
    EXPECT_EQ(r.fp, base.fp + 2);
  }
}

}  // namespace
}  // namespace densefocus
