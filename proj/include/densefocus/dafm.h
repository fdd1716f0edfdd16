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
#ifndef DENSEFOCUS_DAFM_H_
#define DENSEFOCUS_DAFM_H_

#include <cstddef>
#include <cstdint>
#include <string>

#include "densefocus/autodiff.h"
#include "densefocus/density.h"
#include "densefocus/params.h"
#include "densefocus/region_select.h"
#include "densefocus/tensor.h"

namespace densefocus {

// Two-stage agent attention weights. Projections map C -> d; the per-agent
// biases broadcast over pixels; wo maps the attended d-dim features back to C.
template <class T>
struct IfamWeights {
  T wq, wk, wv;      // [d, C]
  T b_fwd, b_bwd;    // [n]
  T wo;              // [C, d]

  template <class Self, class F>
  static void Visit(Self& s, F&& f) {
    f("wq", s.wq);
    f("wk", s.wk);
    f("wv", s.wv);
    f("b_fwd", s.b_fwd);
    f("b_bwd", s.b_bwd);
    f("wo", s.wo);
  }
  template <class F>
  auto Map(F&& f) const {
    using U = decltype(f(wq));
    return IfamWeights<U>{f(wq), f(wk), f(wv), f(b_fwd), f(b_bwd), f(wo)};
  }
};

template <class T>
struct DafmWeights {
  FocusBankWeights<T> bank;
  IfamWeights<T> ifam;
  T dw;  // [C,1,k,k]
  T pw;  // [C,C,1,1]

  template <class Self, class F>
  static void Visit(Self& s, F&& f) {
    VisitNested(s.bank, "bank.", f);
    VisitNested(s.ifam, "ifam.", f);
    f("dw", s.dw);
    f("pw", s.pw);
  }
  template <class F>
  auto Map(F&& f) const {
    using U = decltype(f(dw));
    DafmWeights<U> out;
    out.bank = bank.Map(f);
    out.ifam = ifam.Map(f);
    out.dw = f(dw);
    out.pw = f(pw);
    return out;
  }
};

struct DafmConfig {
  std::size_t channels = 8;
  // Attention width d; 0 means d = channels.
  std::size_t proj_dim = 0;
  std::size_t dw_kernel = 3;
  ThresholdSpec threshold;
  KMeansOptions kmeans;

  std::size_t width_d() const { return proj_dim == 0 ? channels : proj_dim; }
};

// Number of focus-bank agents for an H x W feature map.
std::size_t AgentCount(std::size_t h, std::size_t w);

IfamWeights<Tensor> InitIfam(std::size_t channels, std::size_t d,
                             std::size_t agents, std::uint64_t seed,
                             const std::string& name);
// Weights for feature maps of extent h x w (the agent biases depend on it).
DafmWeights<Tensor> InitDafm(const DafmConfig& cfg, std::size_t h,
                             std::size_t w, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Attention pieces. Pixels are flattened row-major: L = H*W.

struct QkvGraph {
  ag::Var q, k, v;  // [L, d]
};

QkvGraph ProjectQkv(const ag::Var& features, const IfamWeights<ag::Var>& w);

// O_A = sigmoid(N K^T / sqrt(d) + b_fwd) V, b_fwd broadcast along pixels.
ag::Var IfamStage1(const ag::Var& agents, const ag::Var& k, const ag::Var& v,
                   const ag::Var& b_fwd);
Tensor IfamStage1(const Tensor& agents, const Tensor& k, const Tensor& v,
                  const Tensor& b_fwd);

// Y = sigmoid(Q N^T / sqrt(d) + b_bwd) O_A, b_bwd broadcast along pixels.
ag::Var IfamStage2(const ag::Var& q, const ag::Var& agents, const ag::Var& o_a,
                   const ag::Var& b_bwd);
Tensor IfamStage2(const Tensor& q, const Tensor& agents, const Tensor& o_a,
                  const Tensor& b_bwd);

struct IfamTrace {
  Tensor agents;  // [n, d]
  Tensor o_a;     // [n, d]
  Tensor y;       // [L, d]
};

// Full attention from a bank of agent rows [n, C] against features [C,H,W]:
// agents are projected with wq, then both stages run and wo maps the result
// back to [C,H,W].
ag::Var Ifam(const ag::Var& features, const ag::Var& bank_rows,
             const IfamWeights<ag::Var>& w, IfamTrace* trace = nullptr);

struct DafmTrace {
  BinaryMask mask;      // refined mask M'
  RegionSet regions;
  Tensor bank;          // [C, H', W']
  IfamTrace ifam;
  bool fallback = false;  // true when no region was selected
};

// X' = Y + DWConv(X), where Y attends from the focus bank of the refined
// density mask. `density` may have any spatial extent; it is resized to the
// feature map. With an empty region set, Y = 0. The mask path is not
// differentiable: requesting gradients through `density` raises
// UnsupportedOperation.
ag::Var DafmForward(const ag::Var& features, const ag::Var& density,
                    const DafmWeights<ag::Var>& w, const DafmConfig& cfg,
                    DafmTrace* trace = nullptr);
Tensor DafmForward(const Tensor& features, const DensityMap& density,
                   const DafmWeights<Tensor>& w, const DafmConfig& cfg,
                   DafmTrace* trace = nullptr);

// Reference dense softmax self-attention over all L pixels with the same
// projections (wq, wk, wv, wo). Streams one query row at a time; used as the
// compute baseline.
Tensor GlobalSelfAttention(const Tensor& features, const IfamWeights<Tensor>& w);

}  // namespace densefocus

#endif  // DENSEFOCUS_DAFM_H_
