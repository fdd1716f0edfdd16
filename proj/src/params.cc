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
#include "densefocus/params.h"

#include <cmath>

#include "densefocus/rng.h"

namespace densefocus {

Tensor InitUniform(std::uint64_t seed, std::string_view name, Shape shape,
                   std::size_t fan_in) {
  if (fan_in == 0) throw InvalidArgument("InitUniform: fan_in must be positive");
  SplitMix64 rng(seed ^ HashName(name));
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.Uniform(-bound, bound);
  return t;
}

}  // namespace densefocus
