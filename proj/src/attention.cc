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
#include "densefocus/attention.h"

#include <algorithm>

#include "densefocus/errors.h"

namespace densefocus {

std::size_t ReducedChannels(std::size_t channels, std::size_t reduction) {
  if (reduction == 0) throw InvalidArgument("channel reduction must be >= 1");
  return std::max<std::size_t>(1, channels / reduction);
}

ChannelAttentionWeights<Tensor> InitChannelAttention(
    std::size_t channels, std::size_t reduction, std::uint64_t seed,
    const std::string& name) {
  const std::size_t hidden = ReducedChannels(channels, reduction);
  return {InitUniform(seed, name + "w1", {hidden, channels}, channels),
          InitUniform(seed, name + "b1", {hidden}, channels),
          InitUniform(seed, name + "w2", {channels, hidden}, hidden),
          InitUniform(seed, name + "b2", {channels}, hidden)};
}

SpatialAttentionWeights<Tensor> InitSpatialAttention(std::size_t kernel,
                                                     std::uint64_t seed,
                                                     const std::string& name) {
  if (kernel % 2 == 0) {
    throw InvalidArgument("spatial attention kernel must be odd");
  }
  const std::size_t fan_in = 2 * kernel * kernel;
  return {InitUniform(seed, name + "w", {1, 2, kernel, kernel}, fan_in),
          InitUniform(seed, name + "b", {1}, fan_in)};
}

ag::Var ChannelAttention(const ag::Var& x,
                         const ChannelAttentionWeights<ag::Var>& p) {
  RequireChw(x.value(), "ChannelAttention input");
  const std::size_t c = x.shape()[0];
  if (p.w1.shape().size() != 2 || p.w1.shape()[1] != c) {
    throw InvalidArgument("ChannelAttention: squeeze weights do not match " +
                          std::to_string(c) + " channels");
  }
  ag::Var z = ag::Reshape(ag::SpatialMean(x), {c, 1});
  ag::Var hidden = ag::Relu(ag::AddColumnVector(ag::Matmul(p.w1, z), p.b1));
  ag::Var gate =
      ag::Sigmoid(ag::AddColumnVector(ag::Matmul(p.w2, hidden), p.b2));
  return ag::ScaleChannels(x, ag::Reshape(gate, {c}));
}

Tensor ChannelAttention(const Tensor& x,
                        const ChannelAttentionWeights<Tensor>& p) {
  return ChannelAttention(ag::Constant(x), Lift(p, false)).value();
}

ag::Var SpatialAttention(const ag::Var& x,
                         const SpatialAttentionWeights<ag::Var>& p) {
  RequireChw(x.value(), "SpatialAttention input");
  const std::size_t k = p.w.shape()[2];
  ag::Var stacked = ag::ConcatChannels(ag::ChannelMean(x), ag::ChannelMax(x));
  ag::Var gate = ag::Sigmoid(ag::Conv2d(stacked, p.w, p.b, 1, (k - 1) / 2));
  return ag::MulChannels(x, gate);
}

Tensor SpatialAttention(const Tensor& x,
                        const SpatialAttentionWeights<Tensor>& p) {
  return SpatialAttention(ag::Constant(x), Lift(p, false)).value();
}

}  // namespace densefocus
