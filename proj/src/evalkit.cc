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
#include "densefocus/evalkit.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "densefocus/errors.h"

namespace densefocus {

double Iou(const Box& a, const Box& b) {
  if (!(a.w > 0.0 && a.h > 0.0 && b.w > 0.0 && b.h > 0.0)) {
    throw InvalidArgument("Iou: boxes need positive extents");
  }
  const double iw = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const double ih = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

namespace {

using Key = std::pair<std::int64_t, std::int64_t>;  // (image, category)

struct Grouped {
  std::map<Key, std::vector<std::size_t>> dets;
  std::map<Key, std::vector<std::size_t>> gts;
  std::set<std::int64_t> categories;
};

Grouped Group(std::span<const Detection> dets,
              std::span<const BBoxAnnotation> gts) {
  Grouped g;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    g.dets[{dets[i].image_id, dets[i].category_id}].push_back(i);
    g.categories.insert(dets[i].category_id);
  }
  for (std::size_t i = 0; i < gts.size(); ++i) {
    g.gts[{gts[i].image_id, gts[i].category_id}].push_back(i);
    g.categories.insert(gts[i].category_id);
  }
  return g;
}

// Indices of `idx` by descending score, ties in input order, capped.
std::vector<std::size_t> RankDetections(std::span<const Detection> dets,
                                        std::vector<std::size_t> idx,
                                        std::size_t max_dets) {
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].score > dets[b].score;
  });
  if (idx.size() > max_dets) idx.resize(max_dets);
  return idx;
}

struct ImageEval {
  std::vector<double> scores;   // kept detections in rank order
  std::vector<bool> tp;
  std::vector<bool> ignored;
  std::size_t num_gt = 0;       // non-ignored ground truth
};

// COCO evaluateImg for one (image, category), one threshold and area range.
ImageEval EvaluateImage(std::span<const Detection> dets,
                        const std::vector<std::size_t>& det_idx,
                        std::span<const BBoxAnnotation> gts,
                        const std::vector<std::size_t>& gt_idx,
                        double iou_thresh, const AreaRange& range,
                        std::size_t max_dets) {
  // Non-ignored ground truth first, input order otherwise.
  std::vector<std::size_t> g = gt_idx;
  std::stable_sort(g.begin(), g.end(), [&](std::size_t a, std::size_t b) {
    return range.contains(gts[a].w * gts[a].h) &&
           !range.contains(gts[b].w * gts[b].h);
  });
  std::vector<bool> g_ignore(g.size());
  ImageEval ev;
  for (std::size_t j = 0; j < g.size(); ++j) {
    g_ignore[j] = !range.contains(gts[g[j]].w * gts[g[j]].h);
    if (!g_ignore[j]) ++ev.num_gt;
  }
  std::vector<Box> gboxes;
  for (std::size_t j : g) gboxes.push_back(gts[j].box());

  const std::vector<std::size_t> ranked = RankDetections(dets, det_idx, max_dets);
  std::vector<bool> g_taken(g.size(), false);
  const double floor_iou = std::min(iou_thresh, 1.0 - 1e-10);
  for (std::size_t d : ranked) {
    double best_iou = floor_iou;
    std::ptrdiff_t best = -1;
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (g_taken[j]) continue;
      if (best > -1 && !g_ignore[static_cast<std::size_t>(best)] && g_ignore[j]) break;
      const double iou = Iou(dets[d].bbox, gboxes[j]);
      if (iou < best_iou) continue;
      best_iou = iou;
      best = static_cast<std::ptrdiff_t>(j);
    }
    ev.scores.push_back(dets[d].score);
    if (best >= 0) {
      const auto b = static_cast<std::size_t>(best);
      g_taken[b] = true;
      ev.tp.push_back(true);
      ev.ignored.push_back(g_ignore[b]);
    } else {
      ev.tp.push_back(false);
      ev.ignored.push_back(!range.contains(dets[d].bbox.area()));
    }
  }
  return ev;
}

double AccumulateCategory(const std::vector<ImageEval>& evals) {
  std::size_t num_gt = 0;
  std::vector<std::pair<double, bool>> ranked;
  for (const ImageEval& ev : evals) {
    num_gt += ev.num_gt;
    for (std::size_t i = 0; i < ev.scores.size(); ++i) {
      if (!ev.ignored[i]) ranked.emplace_back(ev.scores[i], ev.tp[i]);
    }
  }
  if (num_gt == 0) return kNoGroundTruth;
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<bool> flags;
  flags.reserve(ranked.size());
  for (const auto& r : ranked) flags.push_back(r.second);
  return AveragePrecision(flags, num_gt);
}

}  // namespace

MatchResult MatchDetections(std::span<const Detection> dets,
                            std::span<const BBoxAnnotation> gts,
                            double iou_thresh, std::size_t max_dets) {
  MatchResult out;
  out.detections.assign(dets.size(), DetOutcome::kTruncated);
  out.gt_matched.assign(gts.size(), false);
  const Grouped grouped = Group(dets, gts);
  static const std::vector<std::size_t> kNone;
  for (const auto& [key, det_idx] : grouped.dets) {
    auto it = grouped.gts.find(key);
    const std::vector<std::size_t>& gt_idx = it == grouped.gts.end() ? kNone : it->second;
    const std::vector<std::size_t> ranked = RankDetections(dets, det_idx, max_dets);
    for (std::size_t d : ranked) {
      double best_iou = std::min(iou_thresh, 1.0 - 1e-10);
      std::ptrdiff_t best = -1;
      for (std::size_t j : gt_idx) {
        if (out.gt_matched[j]) continue;
        const double iou = Iou(dets[d].bbox, gts[j].box());
        if (iou < best_iou) continue;
        best_iou = iou;
        best = static_cast<std::ptrdiff_t>(j);
      }
      if (best >= 0) {
        out.gt_matched[static_cast<std::size_t>(best)] = true;
        out.detections[d] = DetOutcome::kTruePositive;
        ++out.tp;
      } else {
        out.detections[d] = DetOutcome::kFalsePositive;
        ++out.fp;
      }
    }
  }
  out.fn = gts.size() - out.tp;
  return out;
}

double AveragePrecision(const std::vector<bool>& ranked_tp, std::size_t total_gt) {
  if (total_gt == 0) return kNoGroundTruth;
  const std::size_t n = ranked_tp.size();
  std::vector<double> recall(n), precision(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (ranked_tp[i]) ++tp;
    recall[i] = static_cast<double>(tp) / static_cast<double>(total_gt);
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  // Precision envelope: best precision at any equal-or-higher recall.
  for (std::size_t i = n; i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double sum = 0.0;
  for (int r = 0; r <= 100; ++r) {
    const double thresh = static_cast<double>(r) / 100.0;
    auto it = std::lower_bound(recall.begin(), recall.end(), thresh);
    if (it != recall.end()) {
      sum += precision[static_cast<std::size_t>(it - recall.begin())];
    }
  }
  return sum / 101.0;
}

double ApAt(std::span<const Detection> dets, std::span<const BBoxAnnotation> gts,
            double iou_thresh, const AreaRange& range, std::size_t max_dets) {
  const Grouped grouped = Group(dets, gts);
  static const std::vector<std::size_t> kNone;
  std::set<Key> keys;
  for (const auto& kv : grouped.dets) keys.insert(kv.first);
  for (const auto& kv : grouped.gts) keys.insert(kv.first);

  std::map<std::int64_t, std::vector<ImageEval>> by_category;
  for (const Key& key : keys) {
    auto d = grouped.dets.find(key);
    auto g = grouped.gts.find(key);
    by_category[key.second].push_back(EvaluateImage(
        dets, d == grouped.dets.end() ? kNone : d->second, gts,
        g == grouped.gts.end() ? kNone : g->second, iou_thresh, range,
        max_dets));
  }
  double sum = 0.0;
  std::size_t valid = 0;
  for (const auto& [cat, evals] : by_category) {
    const double ap = AccumulateCategory(evals);
    if (ap < 0.0) continue;
    sum += ap;
    ++valid;
  }
  return valid == 0 ? kNoGroundTruth : sum / static_cast<double>(valid);
}

APReport ApReport(std::span<const Detection> dets,
                  std::span<const BBoxAnnotation> gts, const EvalOptions& opts) {
  for (const Detection& d : dets) {
    if (!(d.bbox.w > 0.0 && d.bbox.h > 0.0) || !std::isfinite(d.score)) {
      throw InvalidArgument("detections need positive extents and finite scores");
    }
  }
  for (const BBoxAnnotation& g : gts) {
    if (!(g.w > 0.0 && g.h > 0.0)) {
      throw InvalidArgument("ground-truth boxes need positive extents");
    }
  }
  APReport report;
  const MatchResult m = MatchDetections(dets, gts, 0.5, opts.max_dets);
  report.tp = m.tp;
  report.fp = m.fp;
  report.fn = m.fn;
  if (gts.empty()) return report;

  double sum = 0.0;
  std::size_t valid = 0;
  for (int i = 0; i < 10; ++i) {
    const double t = 0.5 + 0.05 * static_cast<double>(i);
    const double ap = ApAt(dets, gts, t, kAreaAll, opts.max_dets);
    if (i == 0) report.ap50 = ap;
    if (i == 5) report.ap75 = ap;
    if (ap >= 0.0) {
      sum += ap;
      ++valid;
    }
  }
  report.ap = valid == 0 ? kNoGroundTruth : sum / static_cast<double>(valid);
  report.ap_vt = ApAt(dets, gts, 0.5, kAreaVeryTiny, opts.max_dets);
  report.ap_t = ApAt(dets, gts, 0.5, kAreaTiny, opts.max_dets);
  report.ap_s = ApAt(dets, gts, 0.5, kAreaSmall, opts.max_dets);
  report.ap_m = ApAt(dets, gts, 0.5, kAreaMedium, opts.max_dets);

  std::set<std::int64_t> cats;
  for (const BBoxAnnotation& g : gts) cats.insert(g.category_id);
  for (const Detection& d : dets) cats.insert(d.category_id);
  for (std::int64_t cat : cats) {
    std::vector<Detection> cd;
    std::vector<BBoxAnnotation> cg;
    for (const Detection& d : dets) {
      if (d.category_id == cat) cd.push_back(d);
    }
    for (const BBoxAnnotation& g : gts) {
      if (g.category_id == cat) cg.push_back(g);
    }
    report.per_category.emplace_back(
        cat, ApAt(cd, cg, opts.class_iou, kAreaAll, opts.max_dets));
  }
  return report;
}

}  // namespace densefocus
