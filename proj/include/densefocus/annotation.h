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
#ifndef DENSEFOCUS_ANNOTATION_H_
#define DENSEFOCUS_ANNOTATION_H_

#include <cstdint>
#include <optional>

namespace densefocus {

// Axis-aligned box in pixel units, top-left origin.
struct Box {
  double x = 0.0, y = 0.0, w = 0.0, h = 0.0;

  double area() const { return w * h; }
  friend bool operator==(const Box&, const Box&) = default;
};

// Ground-truth (score absent) or predicted (score present) object box,
// stored by center and extent.
struct BBoxAnnotation {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  std::int64_t category_id = 1;
  double cx = 0.0, cy = 0.0, w = 0.0, h = 0.0;
  std::optional<double> score;

  static BBoxAnnotation FromBox(std::int64_t image_id, std::int64_t category_id,
                                const Box& box) {
    BBoxAnnotation a;
    a.image_id = image_id;
    a.category_id = category_id;
    a.cx = box.x + box.w / 2.0;
    a.cy = box.y + box.h / 2.0;
    a.w = box.w;
    a.h = box.h;
    return a;
  }

  Box box() const { return {cx - w / 2.0, cy - h / 2.0, w, h}; }
};

}  // namespace densefocus

#endif  // DENSEFOCUS_ANNOTATION_H_
