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
#ifndef DENSEFOCUS_GRADCHECK_SUITE_H_
#define DENSEFOCUS_GRADCHECK_SUITE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "densefocus/grad_check.h"
#include "densefocus/tensor.h"

namespace densefocus {

// A scalar graph over micro shapes together with the point to check it at.
struct GradCheckCase {
  std::vector<Tensor> point;
  ScalarGraphFn fn;
};

// Module names accepted by MakeGradCheckCase, with the leaves each checks:
//   density-loss       DGB weights, through the density loss
//   calibration        density input and calibration weights
//   channel-attention  input and weights
//   spatial-attention  input and weights
//   dafm               attention and depthwise-separable weights (mask fixed)
//   dffm               every EDH path's weights
std::vector<std::string> GradCheckModules();

// Point and weights are drawn from `seed`. Throws InvalidArgument for an
// unknown module.
GradCheckCase MakeGradCheckCase(const std::string& module, std::uint64_t seed);

inline constexpr double kGradCheckTolerance = 1e-5;

}  // namespace densefocus

#endif  // DENSEFOCUS_GRADCHECK_SUITE_H_
