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
#include "densefocus/io.h"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <set>

#include "densefocus/errors.h"
#include "json.hpp"

namespace densefocus::io {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'D', 'R', 'M', 'T'};
constexpr std::size_t kHeaderBytes = 7;

void PutLe(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t GetLe(std::string_view in, std::size_t pos, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  return v;
}

json Parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("malformed JSON: ") + e.what(), e.byte);
  }
}

// Typed field access with FormatError instead of json exceptions.
template <typename T>
T Field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw FormatError(where + ": missing field '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw FormatError(where + ": field '" + key + "' has the wrong type");
  }
}

Box ParseBbox(const json& obj, const std::string& where) {
  const auto v = Field<std::vector<double>>(obj, "bbox", where);
  if (v.size() != 4) throw FormatError(where + ": bbox needs 4 numbers");
  for (double x : v) {
    if (!std::isfinite(x)) throw FormatError(where + ": bbox is not finite");
  }
  if (!(v[2] > 0.0 && v[3] > 0.0)) throw FormatError(where + ": bbox extents must be > 0");
  return Box{v[0], v[1], v[2], v[3]};
}

json BboxJson(const Box& b) { return json::array({b.x, b.y, b.w, b.h}); }

std::string Dump(const json& j) { return j.dump(2) + "\n"; }

Detection ParseDetection(const json& a, std::size_t index) {
  const std::string where = "detection " + std::to_string(index);
  Detection d;
  d.image_id = Field<std::int64_t>(a, "image_id", where);
  d.category_id = a.contains("category_id") ? Field<std::int64_t>(a, "category_id", where) : 1;
  d.bbox = ParseBbox(a, where);
  d.score = Field<double>(a, "score", where);
  if (!std::isfinite(d.score)) throw FormatError(where + ": score is not finite");
  return d;
}

}  // namespace

std::string EncodeTensor(const Tensor& t) {
  if (t.rank() == 0 || t.rank() > 255) {
    throw InvalidArgument("tensor files hold ranks 1..255");
  }
  std::string out(kMagic, 4);
  out.push_back(static_cast<char>(kTensorFileVersion));
  out.push_back(static_cast<char>(kDtypeF64));
  out.push_back(static_cast<char>(t.rank()));
  for (std::size_t d : t.shape()) {
    if (d > std::numeric_limits<std::uint32_t>::max()) {
      throw InvalidArgument("tensor extent exceeds 32 bits");
    }
    PutLe(out, d, 4);
  }
  out.reserve(out.size() + 8 * t.size());
  for (double v : t.data()) PutLe(out, std::bit_cast<std::uint64_t>(v), 8);
  return out;
}

Tensor DecodeTensor(std::string_view bytes) {
  if (bytes.size() < kHeaderBytes) throw FormatError("truncated tensor header", bytes.size());
  for (std::size_t i = 0; i < 4; ++i) {
    if (bytes[i] != kMagic[i]) throw FormatError("bad tensor magic", i);
  }
  if (static_cast<std::uint8_t>(bytes[4]) != kTensorFileVersion) {
    throw FormatError("unsupported tensor file version", 4);
  }
  if (static_cast<std::uint8_t>(bytes[5]) != kDtypeF64) {
    throw FormatError("unsupported tensor dtype", 5);
  }
  const std::size_t ndim = static_cast<std::uint8_t>(bytes[6]);
  if (ndim == 0) throw FormatError("tensor rank must be >= 1", 6);
  std::size_t pos = kHeaderBytes;
  if (bytes.size() < pos + 4 * ndim) throw FormatError("truncated tensor dims", bytes.size());
  Shape shape;
  std::size_t count = 1;
  for (std::size_t i = 0; i < ndim; ++i, pos += 4) {
    const std::size_t d = GetLe(bytes, pos, 4);
    if (d == 0) throw FormatError("zero tensor extent", pos);
    if (count > std::numeric_limits<std::size_t>::max() / 8 / d) {
      throw FormatError("tensor dims overflow", pos);
    }
    count *= d;
    shape.push_back(d);
  }
  const std::size_t payload = bytes.size() - pos;
  if (payload < 8 * count) throw FormatError("truncated tensor payload", bytes.size());
  if (payload > 8 * count) throw FormatError("trailing bytes after tensor payload", pos + 8 * count);
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i, pos += 8) {
    data[i] = std::bit_cast<double>(GetLe(bytes, pos, 8));
  }
  return Tensor(std::move(shape), std::move(data));
}

void WriteTensor(const std::filesystem::path& path, const Tensor& t) {
  WriteFile(path, EncodeTensor(t));
}

Tensor ReadTensor(const std::filesystem::path& path) { return DecodeTensor(ReadFile(path)); }

std::string EncodeHeatmap(const Tensor& map) {
  std::size_t h = 0, w = 0;
  if (map.rank() == 3 && map.dim(0) == 1) {
    h = map.dim(1);
    w = map.dim(2);
  } else if (map.rank() == 2) {
    h = map.dim(0);
    w = map.dim(1);
  } else {
    throw InvalidArgument("heatmap expects [1,H,W] or [H,W], got " + ShapeToString(map.shape()));
  }
  if (!map.AllFinite()) throw NumericError("heatmap input is not finite");
  const double lo = map.Min();
  const double hi = map.Max();
  std::string out = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  for (double v : map.data()) {
    const long level = hi > lo ? std::lround(255.0 * (v - lo) / (hi - lo)) : 128;
    out.push_back(static_cast<char>(static_cast<unsigned char>(level)));
  }
  return out;
}

void WriteHeatmap(const std::filesystem::path& path, const Tensor& map) {
  WriteFile(path, EncodeHeatmap(map));
}

AnnotationFile ParseAnnotations(std::string_view text) {
  const json doc = Parse(text);
  if (!doc.is_object()) throw FormatError("annotation file must be a JSON object");
  AnnotationFile file;
  std::set<std::int64_t> image_ids, category_ids;
  for (const json& im : doc.value("images", json::array())) {
    ImageInfo info;
    info.id = Field<std::int64_t>(im, "id", "image");
    const std::string where = "image " + std::to_string(info.id);
    info.width = Field<std::size_t>(im, "width", where);
    info.height = Field<std::size_t>(im, "height", where);
    info.file_name = im.value("file_name", "");
    if (!image_ids.insert(info.id).second) throw FormatError("duplicate " + where);
    file.images.push_back(std::move(info));
  }
  for (const json& c : doc.value("categories", json::array())) {
    Category cat;
    cat.id = Field<std::int64_t>(c, "id", "category");
    cat.name = c.value("name", "");
    if (!category_ids.insert(cat.id).second) {
      throw FormatError("duplicate category " + std::to_string(cat.id));
    }
    file.categories.push_back(std::move(cat));
  }
  for (const json& a : doc.value("annotations", json::array())) {
    const auto id = Field<std::int64_t>(a, "id", "annotation");
    const std::string where = "annotation " + std::to_string(id);
    const auto image_id = Field<std::int64_t>(a, "image_id", where);
    const auto category_id = Field<std::int64_t>(a, "category_id", where);
    if (!image_ids.contains(image_id)) {
      throw FormatError(where + " references unknown image_id " + std::to_string(image_id));
    }
    if (!category_ids.contains(category_id)) {
      throw FormatError(where + " references unknown category_id " +
                        std::to_string(category_id));
    }
    BBoxAnnotation ann = BBoxAnnotation::FromBox(image_id, category_id, ParseBbox(a, where));
    ann.id = id;
    if (a.contains("score")) ann.score = Field<double>(a, "score", where);
    file.annotations.push_back(ann);
  }
  return file;
}

std::string SerializeAnnotations(const AnnotationFile& file) {
  json doc;
  doc["images"] = json::array();
  for (const ImageInfo& im : file.images) {
    doc["images"].push_back(
        {{"id", im.id}, {"width", im.width}, {"height", im.height}, {"file_name", im.file_name}});
  }
  doc["annotations"] = json::array();
  for (const BBoxAnnotation& a : file.annotations) {
    json j = {{"id", a.id},
              {"image_id", a.image_id},
              {"category_id", a.category_id},
              {"bbox", BboxJson(a.box())},
              {"area", a.w * a.h}};
    if (a.score) j["score"] = *a.score;
    doc["annotations"].push_back(std::move(j));
  }
  doc["categories"] = json::array();
  for (const Category& c : file.categories) {
    doc["categories"].push_back({{"id", c.id}, {"name", c.name}});
  }
  return Dump(doc);
}

AnnotationFile ReadAnnotations(const std::filesystem::path& path) {
  return ParseAnnotations(ReadFile(path));
}

void WriteAnnotations(const std::filesystem::path& path, const AnnotationFile& file) {
  WriteFile(path, SerializeAnnotations(file));
}

std::vector<Detection> ParseDetections(std::string_view text) {
  const json doc = Parse(text);
  const json* list = &doc;
  if (doc.is_object()) {
    if (!doc.contains("annotations")) throw FormatError("detections object lacks 'annotations'");
    list = &doc.at("annotations");
  }
  if (!list->is_array()) throw FormatError("detections must be a JSON list");
  std::vector<Detection> dets;
  for (std::size_t i = 0; i < list->size(); ++i) dets.push_back(ParseDetection((*list)[i], i));
  return dets;
}

std::string SerializeDetections(std::span<const Detection> dets) {
  json doc = json::array();
  for (const Detection& d : dets) {
    doc.push_back({{"image_id", d.image_id},
                   {"category_id", d.category_id},
                   {"bbox", BboxJson(d.bbox)},
                   {"score", d.score}});
  }
  return Dump(doc);
}

std::vector<Detection> ReadDetections(const std::filesystem::path& path) {
  return ParseDetections(ReadFile(path));
}

std::string SerializeReport(const APReport& r) {
  json doc = {{"AP", r.ap},       {"AP50", r.ap50}, {"AP75", r.ap75}, {"AP_vt", r.ap_vt},
              {"AP_t", r.ap_t},   {"AP_s", r.ap_s}, {"AP_m", r.ap_m}, {"TP", r.tp},
              {"FP", r.fp},       {"FN", r.fn}};
  json per = json::array();
  for (const auto& [cat, ap] : r.per_category) per.push_back({{"category_id", cat}, {"AP", ap}});
  doc["per_category"] = std::move(per);
  return Dump(doc);
}

std::string SerializeRegions(const RegionSet& regions) {
  json doc = json::array();
  for (const Rect& r : regions.rectangles) {
    doc.push_back({{"r_min", r.r_min + 1},
                   {"r_max", r.r_max + 1},
                   {"c_min", r.c_min + 1},
                   {"c_max", r.c_max + 1}});
  }
  return Dump(doc);
}

ParamBundle ParseBundle(std::string_view text) {
  const json doc = Parse(text);
  ParamBundle bundle;
  bundle.rng_seed = Field<std::uint64_t>(doc, "rng_seed", "bundle");
  const json tensors = doc.value("tensors", json::object());
  if (!tensors.is_object()) throw FormatError("bundle 'tensors' must be an object");
  for (const auto& [name, t] : tensors.items()) {
    const std::string where = "tensor '" + name + "'";
    auto shape = Field<Shape>(t, "shape", where);
    auto data = Field<std::vector<double>>(t, "data", where);
    if (shape.empty() || ShapeSize(shape) != data.size()) {
      throw FormatError(where + ": shape and data length disagree");
    }
    for (std::size_t d : shape) {
      if (d == 0) throw FormatError(where + ": zero extent");
    }
    bundle.tensors.emplace(name, Tensor(std::move(shape), std::move(data)));
  }
  return bundle;
}

std::string SerializeBundle(const ParamBundle& bundle) {
  json tensors = json::object();
  for (const auto& [name, t] : bundle.tensors) {
    tensors[name] = {{"shape", t.shape()}, {"data", t.vec()}};
  }
  return Dump({{"rng_seed", bundle.rng_seed}, {"tensors", std::move(tensors)}});
}

SceneSpec ParseSceneSpec(std::string_view text) {
  const json doc = Parse(text);
  if (!doc.is_object()) throw FormatError("scene spec must be a JSON object");
  SceneSpec spec;
  auto get_size = [&](const char* key, std::size_t& out) {
    if (doc.contains(key)) out = Field<std::size_t>(doc, key, "scene spec");
  };
  auto get_range = [&](const char* key, std::size_t& lo, std::size_t& hi) {
    if (!doc.contains(key)) return;
    const json& v = doc.at(key);
    if (v.is_array()) {
      const auto r = Field<std::vector<std::size_t>>(doc, key, "scene spec");
      if (r.size() != 2) throw FormatError(std::string("scene spec: '") + key + "' needs [min, max]");
      lo = r[0];
      hi = r[1];
    } else {
      lo = hi = Field<std::size_t>(doc, key, "scene spec");
    }
  };
  get_size("width", spec.width);
  get_size("height", spec.height);
  get_size("n_clusters", spec.n_clusters);
  get_range("objects_per_cluster", spec.objects_min, spec.objects_max);
  get_range("object_size", spec.size_min, spec.size_max);
  if (doc.contains("cluster_spread")) {
    spec.cluster_spread = Field<double>(doc, "cluster_spread", "scene spec");
  }
  if (doc.contains("noise_sigma")) spec.noise_sigma = Field<double>(doc, "noise_sigma", "scene spec");
  if (doc.contains("image_id")) spec.image_id = Field<std::int64_t>(doc, "image_id", "scene spec");
  if (doc.contains("seed")) spec.seed = Field<std::uint64_t>(doc, "seed", "scene spec");
  return spec;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void WriteFile(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed for " + path.string());
}

}  // namespace densefocus::io
