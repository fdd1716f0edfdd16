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
#include "densefocus/tensor.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "densefocus/errors.h"

namespace densefocus {

std::size_t ShapeSize(const Shape& shape) {
  if (shape.empty()) return 0;
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string ShapeToString(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ",";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

namespace {

void ValidateShape(const Shape& shape) {
  if (shape.empty()) throw InvalidArgument("tensor shape must be non-empty");
  for (std::size_t d : shape) {
    if (d == 0) {
      throw InvalidArgument("tensor extents must be positive, got " +
                            ShapeToString(shape));
    }
  }
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  ValidateShape(shape_);
  data_.assign(ShapeSize(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  ValidateShape(shape_);
  if (data_.size() != ShapeSize(shape_)) {
    throw InvalidArgument("data length " + std::to_string(data_.size()) +
                          " does not match shape " + ShapeToString(shape_));
  }
}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw InvalidArgument("item() needs a single-element tensor, got " +
                          ShapeToString(shape_));
  }
  return data_[0];
}

Tensor Tensor::Reshaped(Shape shape) const {
  if (ShapeSize(shape) != data_.size()) {
    throw InvalidArgument("cannot reshape " + ShapeToString(shape_) + " to " +
                          ShapeToString(shape));
  }
  return Tensor(std::move(shape), data_);
}

bool Tensor::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

double Tensor::Sum() const {
  CompensatedSum s;
  for (double v : data_) s.Add(v);
  return s.value();
}

double Tensor::Min() const {
  return data_.empty() ? 0.0 : *std::min_element(data_.begin(), data_.end());
}

double Tensor::Max() const {
  return data_.empty() ? 0.0 : *std::max_element(data_.begin(), data_.end());
}

double MaxAbsDiff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw InvalidArgument("MaxAbsDiff shape mismatch " +
                          ShapeToString(a.shape()) + " vs " +
                          ShapeToString(b.shape()));
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

void RequireChw(const Tensor& t, const char* what) {
  if (t.rank() != 3) {
    throw InvalidArgument(std::string(what) + " must be [C,H,W], got " +
                          ShapeToString(t.shape()));
  }
}

}  // namespace densefocus
