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
#include "densefocus/grad_check.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "densefocus/errors.h"
#include "densefocus/rng.h"

namespace densefocus {

namespace {

double Evaluate(const ScalarGraphFn& fn, const std::vector<Tensor>& point) {
  std::vector<ag::Var> leaves;
  leaves.reserve(point.size());
  for (const Tensor& t : point) leaves.push_back(ag::Constant(t));
  return fn(leaves).value().item();
}

}  // namespace

GradCheckResult GradCheck(const ScalarGraphFn& fn, std::span<const Tensor> point,
                          double eps, std::uint64_t sample_seed) {
  if (!(eps > 0.0)) throw InvalidArgument("GradCheck: eps must be positive");

  std::vector<ag::Var> leaves;
  for (const Tensor& t : point) leaves.push_back(ag::Parameter(t));
  const ag::Var out = fn(leaves);
  const ag::Gradients grads = ag::Backward(out);

  std::vector<std::pair<std::size_t, std::size_t>> coords;  // (tensor, index)
  for (std::size_t t = 0; t < point.size(); ++t) {
    for (std::size_t i = 0; i < point[t].size(); ++i) coords.emplace_back(t, i);
  }
  std::vector<std::size_t> flat_index(coords.size());
  std::iota(flat_index.begin(), flat_index.end(), std::size_t{0});
  if (coords.size() > kMaxGradCheckCoordinates) {
    SplitMix64 rng(sample_seed);
    for (std::size_t i = 0; i < kMaxGradCheckCoordinates; ++i) {
      const auto j = static_cast<std::size_t>(rng.UniformInt(
          static_cast<std::int64_t>(i),
          static_cast<std::int64_t>(coords.size() - 1)));
      std::swap(flat_index[i], flat_index[j]);
    }
    flat_index.resize(kMaxGradCheckCoordinates);
  }

  std::vector<Tensor> analytic;
  for (const ag::Var& leaf : leaves) analytic.push_back(grads.of(leaf));

  std::vector<Tensor> work(point.begin(), point.end());
  GradCheckResult result;
  for (std::size_t flat : flat_index) {
    const auto [t, i] = coords[flat];
    const double original = work[t][i];
    work[t][i] = original + eps;
    const double plus = Evaluate(fn, work);
    work[t][i] = original - eps;
    const double minus = Evaluate(fn, work);
    work[t][i] = original;
    const double numeric = (plus - minus) / (2.0 * eps);
    const double a = analytic[t][i];
    const double err = std::abs(a - numeric) / std::max(1e-8, std::abs(numeric));
    if (!std::isfinite(err)) {
      throw NumericError("GradCheck: non-finite error at coordinate " +
                         std::to_string(flat));
    }
    if (result.coordinates_checked == 0 || err > result.max_rel_error) {
      result.max_rel_error = err;
      result.worst_index = flat;
      result.worst_analytic = a;
      result.worst_numeric = numeric;
    }
    ++result.coordinates_checked;
  }
  return result;
}

}  // namespace densefocus
