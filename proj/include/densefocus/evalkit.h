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
#ifndef DENSEFOCUS_EVALKIT_H_
#define DENSEFOCUS_EVALKIT_H_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "densefocus/annotation.h"

namespace densefocus {

struct Detection {
  std::int64_t image_id = 0;
  std::int64_t category_id = 1;
  Box bbox;
  double score = 0.0;
};

// Intersection over union of two boxes with positive extents.
double Iou(const Box& a, const Box& b);

enum class DetOutcome { kTruePositive, kFalsePositive, kTruncated };

struct MatchResult {
  std::vector<DetOutcome> detections;  // input order
  std::vector<bool> gt_matched;        // input order
  std::size_t tp = 0, fp = 0, fn = 0;
};

// Greedy COCO matching within each (image, category): detections by
// descending score (ties keep input order), the top `max_dets` kept, each
// matched to the unmatched ground truth with the highest IoU >= iou_thresh.
MatchResult MatchDetections(std::span<const Detection> dets,
                            std::span<const BBoxAnnotation> gts,
                            double iou_thresh, std::size_t max_dets);

// 101-point interpolated AP for detections already ranked by score. Returns
// -1 when total_gt == 0.
double AveragePrecision(const std::vector<bool>& ranked_tp,
                        std::size_t total_gt);

inline constexpr double kNoGroundTruth = -1.0;
inline constexpr std::size_t kDefaultMaxDets = 100;
inline constexpr std::size_t kDtodMaxDets = 1500;

// Ground-truth area buckets for the size-specific metrics, half-open
// [lo, hi) in square pixels.
struct AreaRange {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double area) const { return area >= lo && area < hi; }
};

inline constexpr AreaRange kAreaAll{};
inline constexpr AreaRange kAreaVeryTiny{0.0, 8.0 * 8.0};
inline constexpr AreaRange kAreaTiny{8.0 * 8.0, 16.0 * 16.0};
inline constexpr AreaRange kAreaSmall{16.0 * 16.0, 32.0 * 32.0};
inline constexpr AreaRange kAreaMedium{32.0 * 32.0,
                                       std::numeric_limits<double>::infinity()};

struct EvalOptions {
  std::size_t max_dets = kDefaultMaxDets;
  // IoU threshold for the per-category table.
  double class_iou = 0.5;
};

struct APReport {
  double ap = kNoGroundTruth;
  double ap50 = kNoGroundTruth;
  double ap75 = kNoGroundTruth;
  double ap_vt = kNoGroundTruth;
  double ap_t = kNoGroundTruth;
  double ap_s = kNoGroundTruth;
  double ap_m = kNoGroundTruth;
  // Matching counts at IoU 0.50 over all areas.
  std::size_t tp = 0, fp = 0, fn = 0;
  // (category_id, AP at class_iou), sorted by id; -1 for no ground truth.
  std::vector<std::pair<std::int64_t, double>> per_category;
};

// AP averages IoU 0.50:0.05:0.95; the size buckets are evaluated at IoU 0.50.
// Within a bucket, ground truths outside the range are ignored, as are
// unmatched detections whose own area falls outside it. Category APs are
// averaged over categories that have ground truth in the bucket.
APReport ApReport(std::span<const Detection> dets,
                  std::span<const BBoxAnnotation> gts,
                  const EvalOptions& opts = {});

// AP for one IoU threshold and area range (category mean; -1 if no ground
// truth falls in the range).
double ApAt(std::span<const Detection> dets, std::span<const BBoxAnnotation> gts,
            double iou_thresh, const AreaRange& range, std::size_t max_dets);

}  // namespace densefocus

#endif  // DENSEFOCUS_EVALKIT_H_
