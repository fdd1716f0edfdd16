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
#ifndef DENSEFOCUS_GRAD_CHECK_H_
#define DENSEFOCUS_GRAD_CHECK_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "densefocus/autodiff.h"
#include "densefocus/tensor.h"

namespace densefocus {

// Builds a scalar graph from leaf Vars (one per point tensor).
using ScalarGraphFn = std::function<ag::Var(std::span<const ag::Var>)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t coordinates_checked = 0;
  // Flat index (across all point tensors) of the worst coordinate.
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Compares reverse-mode gradients with central differences of step `eps`.
// Every coordinate is checked when the point has at most kMaxCoordinates
// entries; otherwise kMaxCoordinates coordinates are sampled with
// `sample_seed`. Error per coordinate is
//   |analytic - numeric| / max(1e-8, |numeric|).
GradCheckResult GradCheck(const ScalarGraphFn& fn, std::span<const Tensor> point,
                          double eps = 1e-6, std::uint64_t sample_seed = 0);

inline constexpr std::size_t kMaxGradCheckCoordinates = 512;

}  // namespace densefocus

#endif  // DENSEFOCUS_GRAD_CHECK_H_
