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
#ifndef DENSEFOCUS_IO_H_
#define DENSEFOCUS_IO_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "densefocus/annotation.h"
#include "densefocus/evalkit.h"
#include "densefocus/params.h"
#include "densefocus/region_select.h"
#include "densefocus/synthgen.h"
#include "densefocus/tensor.h"

namespace densefocus::io {

// Tensor files: "DRMT", version (1), dtype (0 = f64), ndim, ndim u32 LE
// extents, then the row-major f64 LE payload.
inline constexpr std::uint8_t kTensorFileVersion = 1;
inline constexpr std::uint8_t kDtypeF64 = 0;

std::string EncodeTensor(const Tensor& t);
Tensor DecodeTensor(std::string_view bytes);
void WriteTensor(const std::filesystem::path& path, const Tensor& t);
Tensor ReadTensor(const std::filesystem::path& path);

// Binary 8-bit PGM of a [1,H,W] or [H,W] map, min-max scaled to [0, 255].
// A constant map is written as 128 everywhere.
std::string EncodeHeatmap(const Tensor& map);
void WriteHeatmap(const std::filesystem::path& path, const Tensor& map);

struct ImageInfo {
  std::int64_t id = 0;
  std::size_t width = 0;
  std::size_t height = 0;
  std::string file_name;
};

struct Category {
  std::int64_t id = 0;
  std::string name;
};

// COCO-subset annotation document.
struct AnnotationFile {
  std::vector<ImageInfo> images;
  std::vector<BBoxAnnotation> annotations;
  std::vector<Category> categories;
};

// Throws FormatError on malformed JSON, missing fields, non-positive
// extents or dangling image/category references (naming the annotation).
AnnotationFile ParseAnnotations(std::string_view json);
std::string SerializeAnnotations(const AnnotationFile& file);
AnnotationFile ReadAnnotations(const std::filesystem::path& path);
void WriteAnnotations(const std::filesystem::path& path, const AnnotationFile& file);

// Detections: either a plain list of {image_id, category_id, bbox, score}
// or an annotation document whose annotations carry scores.
std::vector<Detection> ParseDetections(std::string_view json);
std::string SerializeDetections(std::span<const Detection> dets);
std::vector<Detection> ReadDetections(const std::filesystem::path& path);

std::string SerializeReport(const APReport& report);

// Regions as 1-based inclusive [r_min, r_max, c_min, c_max] rows.
std::string SerializeRegions(const RegionSet& regions);

ParamBundle ParseBundle(std::string_view json);
std::string SerializeBundle(const ParamBundle& bundle);

// Flat JSON object; objects_per_cluster and object_size accept either a
// number or a [min, max] pair. Missing keys keep their defaults.
SceneSpec ParseSceneSpec(std::string_view json);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view bytes);

}  // namespace densefocus::io

#endif  // DENSEFOCUS_IO_H_
