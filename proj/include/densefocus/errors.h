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
#ifndef DENSEFOCUS_ERRORS_H_
#define DENSEFOCUS_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace densefocus {

// Bad shapes, out-of-range hyperparameters, malformed configuration.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed files. `offset` is the byte offset at which decoding failed, or
// kNoOffset for structured (JSON) inputs.
class FormatError : public std::runtime_error {
 public:
  static constexpr std::size_t kNoOffset = static_cast<std::size_t>(-1);

  explicit FormatError(const std::string& what, std::size_t offset = kNoOffset)
      : std::runtime_error(offset == kNoOffset
                               ? what
                               : what + " (at byte " + std::to_string(offset) +
                                     ")"),
        offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Raised when gradients are requested through a non-differentiable path.
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// NaN/Inf detected, or a gradient check above tolerance.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace densefocus

#endif  // DENSEFOCUS_ERRORS_H_
