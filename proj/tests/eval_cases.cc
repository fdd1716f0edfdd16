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

#include "eval_cases.h"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <random>
#include <set>

#include "oracles.h"

namespace densefocus::test_support {

namespace {

BBoxAnnotation Gt(std::int64_t id, std::int64_t image, std::int64_t cat, Box b) {
  BBoxAnnotation a = BBoxAnnotation::FromBox(image, cat, b);
  a.id = id;
  return a;
}

double OracleMean(const EvalScene& s, std::size_t max_dets) {
  double sum = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double v = oracle::ApAt(s.dets, s.gts, 0.5 + 0.05 * i, kAreaAll, max_dets);
    if (v == kNoGroundTruth) return kNoGroundTruth;
    sum += v;
  }
  return sum / 10.0;
}

}  // namespace

EvalScene RandomEvalScene(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> n_gt(0, 6), n_det(0, 12), coin(0, 1), pick(0, 3);
  std::uniform_real_distribution<double> pos(0.0, 80.0), jitter(-3.0, 3.0), u(0.0, 1.0);
  const double sizes[] = {3.0, 6.0, 11.0, 20.0, 40.0};
  auto size = [&] { return sizes[rng() % 5] * (0.8 + 0.4 * u(rng)); };
  EvalScene s;
  const int g = n_gt(rng);
  for (int i = 0; i < g; ++i) {
    s.gts.push_back(Gt(i + 1, 1 + coin(rng), 1 + coin(rng), {pos(rng), pos(rng), size(), size()}));
  }
  const int d = n_det(rng);
  for (int i = 0; i < d; ++i) {
    const double score = std::round(u(rng) * 5.0) / 5.0;
    if (!s.gts.empty() && pick(rng) != 0) {
      const BBoxAnnotation& t = s.gts[rng() % s.gts.size()];
      const double w = std::max(0.5, t.w + jitter(rng)), h = std::max(0.5, t.h + jitter(rng));
      const std::int64_t cat = pick(rng) == 0 ? 3 - t.category_id : t.category_id;
      s.dets.push_back(
          {t.image_id, cat, {t.cx - w / 2 + jitter(rng), t.cy - h / 2 + jitter(rng), w, h}, score});
    } else {
      s.dets.push_back({1 + coin(rng), 1 + coin(rng), {pos(rng), pos(rng), size(), size()}, score});
    }
  }
  return s;
}

double OracleReportGap(const EvalScene& s, const APReport& r, std::size_t md) {
  constexpr double kMismatch = std::numeric_limits<double>::infinity();
  double gap = 0.0;
  auto cmp = [&](double got, double want) { gap = std::max(gap, std::abs(got - want)); };
  cmp(r.ap, OracleMean(s, md));
  cmp(r.ap50, oracle::ApAt(s.dets, s.gts, 0.5, kAreaAll, md));
  cmp(r.ap75, oracle::ApAt(s.dets, s.gts, 0.75, kAreaAll, md));
  cmp(r.ap_vt, oracle::ApAt(s.dets, s.gts, 0.5, kAreaVeryTiny, md));
  cmp(r.ap_t, oracle::ApAt(s.dets, s.gts, 0.5, kAreaTiny, md));
  cmp(r.ap_s, oracle::ApAt(s.dets, s.gts, 0.5, kAreaSmall, md));
  cmp(r.ap_m, oracle::ApAt(s.dets, s.gts, 0.5, kAreaMedium, md));

  std::set<std::int64_t> cats;
  if (!s.gts.empty()) {
    for (const auto& g : s.gts) cats.insert(g.category_id);
    for (const auto& d : s.dets) cats.insert(d.category_id);
  }
  if (r.per_category.size() != cats.size()) return kMismatch;
  for (const auto& [cat, ap] : r.per_category) {
    if (!cats.contains(cat)) return kMismatch;
    std::vector<Detection> cd;
    std::vector<BBoxAnnotation> cg;
    std::copy_if(s.dets.begin(), s.dets.end(), std::back_inserter(cd),
                 [&](const Detection& x) { return x.category_id == cat; });
    std::copy_if(s.gts.begin(), s.gts.end(), std::back_inserter(cg),
                 [&](const BBoxAnnotation& x) { return x.category_id == cat; });
    cmp(ap, oracle::ApAt(cd, cg, 0.5, kAreaAll, md));
  }

  const MatchResult m = MatchDetections(s.dets, s.gts, 0.5, md);
  if (r.tp != m.tp || r.fp != m.fp || r.fn != m.fn) return kMismatch;
  if (r.tp + r.fn != s.gts.size()) return kMismatch;
  return gap;
}

}  // namespace densefocus::test_support
