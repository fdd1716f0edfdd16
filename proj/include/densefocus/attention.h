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
#ifndef DENSEFOCUS_ATTENTION_H_
#define DENSEFOCUS_ATTENTION_H_

#include <cstddef>
#include <cstdint>
#include <string>

#include "densefocus/autodiff.h"
#include "densefocus/params.h"
#include "densefocus/tensor.h"

namespace densefocus {

// Squeeze-excite gate: mean over space, C -> C/r -> C MLP, sigmoid, scale.
// w1 [C/r, C], b1 [C/r], w2 [C, C/r], b2 [C].
template <class T>
struct ChannelAttentionWeights {
  T w1, b1, w2, b2;

  template <class Self, class F>
  static void Visit(Self& s, F&& f) {
    f("w1", s.w1);
    f("b1", s.b1);
    f("w2", s.w2);
    f("b2", s.b2);
  }
  template <class F>
  auto Map(F&& f) const {
    using U = decltype(f(w1));
    return ChannelAttentionWeights<U>{f(w1), f(b1), f(w2), f(b2)};
  }
};

// Gate map from a k x k conv over the [channel-mean, channel-max] stack.
// w [1, 2, k, k], b [1].
template <class T>
struct SpatialAttentionWeights {
  T w, b;

  template <class Self, class F>
  static void Visit(Self& s, F&& f) {
    f("w", s.w);
    f("b", s.b);
  }
  template <class F>
  auto Map(F&& f) const {
    using U = decltype(f(w));
    return SpatialAttentionWeights<U>{f(w), f(b)};
  }
};

inline constexpr std::size_t kDefaultChannelReduction = 4;
inline constexpr std::size_t kDefaultSpatialKernel = 7;

// Hidden width of the excite MLP: max(1, C / reduction).
std::size_t ReducedChannels(std::size_t channels, std::size_t reduction);

ChannelAttentionWeights<Tensor> InitChannelAttention(
    std::size_t channels, std::size_t reduction, std::uint64_t seed,
    const std::string& name);
SpatialAttentionWeights<Tensor> InitSpatialAttention(std::size_t kernel,
                                                     std::uint64_t seed,
                                                     const std::string& name);

ag::Var ChannelAttention(const ag::Var& x,
                         const ChannelAttentionWeights<ag::Var>& p);
Tensor ChannelAttention(const Tensor& x,
                        const ChannelAttentionWeights<Tensor>& p);

ag::Var SpatialAttention(const ag::Var& x,
                         const SpatialAttentionWeights<ag::Var>& p);
Tensor SpatialAttention(const Tensor& x,
                        const SpatialAttentionWeights<Tensor>& p);

}  // namespace densefocus

#endif  // DENSEFOCUS_ATTENTION_H_
