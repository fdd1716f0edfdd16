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
#ifndef DENSEFOCUS_PARAMS_H_
#define DENSEFOCUS_PARAMS_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "densefocus/autodiff.h"
#include "densefocus/errors.h"
#include "densefocus/tensor.h"

namespace densefocus {

// Named parameter tensors plus the seed they were initialized from.
struct ParamBundle {
  std::map<std::string, Tensor> tensors;
  std::uint64_t rng_seed = 0;
};

// Uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)], drawn from a SplitMix64
// stream keyed by (seed, name) so the result does not depend on creation
// order.
Tensor InitUniform(std::uint64_t seed, std::string_view name, Shape shape,
                   std::size_t fan_in);

// Weight structs are templates over the leaf type (Tensor for storage,
// ag::Var inside a graph). Each provides
//   template <class Self, class F> static void Visit(Self&, F&&)
// calling f(name, field) for every leaf, and
//   template <class F> auto Map(F&&) const
// returning the same struct over f's result type, visiting leaves in the same
// order as Visit.

template <class W, class F>
void VisitNested(W& child, const std::string& prefix, F& f) {
  std::remove_const_t<W>::Visit(
      child, [&](const std::string& name, auto& leaf) { f(prefix + name, leaf); });
}

template <class W>
std::vector<const Tensor*> Flatten(const W& weights) {
  std::vector<const Tensor*> out;
  W::Visit(weights, [&](const std::string&, const Tensor& t) { out.push_back(&t); });
  return out;
}

template <class W>
std::size_t ParameterCount(const W& weights) {
  std::size_t n = 0;
  for (const Tensor* t : Flatten(weights)) n += t->size();
  return n;
}

template <class W>
void ToBundle(const W& weights, const std::string& prefix, ParamBundle& bundle) {
  W::Visit(weights, [&](const std::string& name, const Tensor& t) {
    bundle.tensors[prefix + name] = t;
  });
}

// Overwrites every leaf of `weights` from `bundle`; leaves keep their
// existing shape as the contract.
template <class W>
void FromBundle(W& weights, const std::string& prefix, const ParamBundle& bundle) {
  W::Visit(weights, [&](const std::string& name, Tensor& t) {
    auto it = bundle.tensors.find(prefix + name);
    if (it == bundle.tensors.end()) {
      throw InvalidArgument("parameter bundle lacks '" + prefix + name + "'");
    }
    if (it->second.shape() != t.shape()) {
      throw InvalidArgument("parameter '" + prefix + name + "' has shape " +
                            ShapeToString(it->second.shape()) + ", expected " +
                            ShapeToString(t.shape()));
    }
    t = it->second;
  });
}

template <class W>
auto Lift(const W& weights, bool trainable) {
  return weights.Map([trainable](const Tensor& t) {
    return trainable ? ag::Parameter(t) : ag::Constant(t);
  });
}

// Rebuilds graph weights from a flat list ordered as Flatten(shape_like).
template <class W>
auto Unflatten(const W& shape_like, std::span<const ag::Var> vars) {
  std::size_t i = 0;
  auto out = shape_like.Map([&](const Tensor&) { return vars[i++]; });
  if (i != vars.size()) throw InvalidArgument("Unflatten: leaf count mismatch");
  return out;
}

}  // namespace densefocus

#endif  // DENSEFOCUS_PARAMS_H_
