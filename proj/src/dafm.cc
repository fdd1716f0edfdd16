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
#include "densefocus/dafm.h"

#include <cmath>
#include <limits>
#include <vector>

#include "densefocus/errors.h"
#include "densefocus/ops.h"

namespace densefocus {

std::size_t AgentCount(std::size_t h, std::size_t w) {
  return ops::PoolExtent(h, kFocusPool, kFocusPool) *
         ops::PoolExtent(w, kFocusPool, kFocusPool);
}

IfamWeights<Tensor> InitIfam(std::size_t channels, std::size_t d,
                             std::size_t agents, std::uint64_t seed,
                             const std::string& name) {
  if (d == 0 || channels == 0 || agents == 0) {
    throw InvalidArgument("IFAM widths must be positive");
  }
  IfamWeights<Tensor> w{
      InitUniform(seed, name + "wq", {d, channels}, channels),
      InitUniform(seed, name + "wk", {d, channels}, channels),
      InitUniform(seed, name + "wv", {d, channels}, channels),
      InitUniform(seed, name + "b_fwd", {agents}, d),
      InitUniform(seed, name + "b_bwd", {agents}, d),
      Tensor()};
  if (d == channels) {
    w.wo = Tensor({channels, d});
    for (std::size_t i = 0; i < d; ++i) w.wo.at(i, i) = 1.0;
  } else {
    w.wo = InitUniform(seed, name + "wo", {channels, d}, d);
  }
  return w;
}

DafmWeights<Tensor> InitDafm(const DafmConfig& cfg, std::size_t h,
                             std::size_t w, std::uint64_t seed) {
  const std::size_t c = cfg.channels, k = cfg.dw_kernel;
  if (k % 2 == 0) throw InvalidArgument("DWConv kernel extent must be odd");
  DafmWeights<Tensor> out;
  out.bank = InitFocusBank(c, seed, "dafm.bank.");
  out.ifam = InitIfam(c, cfg.width_d(), AgentCount(h, w), seed, "dafm.ifam.");
  out.dw = InitUniform(seed, "dafm.dw", {c, 1, k, k}, k * k);
  out.pw = InitUniform(seed, "dafm.pw", {c, c, 1, 1}, c);
  return out;
}

namespace {

// [C,H,W] -> [L, C].
ag::Var PixelRows(const ag::Var& x) {
  const Shape& s = x.shape();
  return ag::Transpose(ag::Reshape(x, {s[0], s[1] * s[2]}));
}

void RequireWidth(const ag::Var& m, std::size_t d, const char* what) {
  if (m.shape().size() != 2 || m.shape()[1] != d) {
    throw InvalidArgument(std::string(what) + " must have width " +
                          std::to_string(d) + ", got " +
                          ShapeToString(m.shape()));
  }
}

}  // namespace

QkvGraph ProjectQkv(const ag::Var& features, const IfamWeights<ag::Var>& w) {
  RequireChw(features.value(), "IFAM features");
  if (w.wq.shape()[1] != features.shape()[0]) {
    throw InvalidArgument("IFAM projections expect " +
                          std::to_string(w.wq.shape()[1]) + " channels, got " +
                          std::to_string(features.shape()[0]));
  }
  ag::Var rows = PixelRows(features);
  return {ag::Matmul(rows, ag::Transpose(w.wq)),
          ag::Matmul(rows, ag::Transpose(w.wk)),
          ag::Matmul(rows, ag::Transpose(w.wv))};
}

ag::Var IfamStage1(const ag::Var& agents, const ag::Var& k, const ag::Var& v,
                   const ag::Var& b_fwd) {
  const std::size_t d = agents.shape().at(1);
  RequireWidth(k, d, "IFAM keys");
  RequireWidth(v, d, "IFAM values");
  if (k.shape()[0] != v.shape()[0]) {
    throw InvalidArgument("IFAM keys and values differ in length");
  }
  ag::Var scores = ag::Scale(ag::Matmul(agents, ag::Transpose(k)),
                             1.0 / std::sqrt(static_cast<double>(d)));
  return ag::Matmul(ag::Sigmoid(ag::AddColumnVector(scores, b_fwd)), v);
}

Tensor IfamStage1(const Tensor& agents, const Tensor& k, const Tensor& v,
                  const Tensor& b_fwd) {
  return IfamStage1(ag::Constant(agents), ag::Constant(k), ag::Constant(v),
                    ag::Constant(b_fwd))
      .value();
}

ag::Var IfamStage2(const ag::Var& q, const ag::Var& agents, const ag::Var& o_a,
                   const ag::Var& b_bwd) {
  const std::size_t d = q.shape().at(1);
  RequireWidth(agents, d, "IFAM agents");
  RequireWidth(o_a, d, "IFAM stage-1 output");
  if (agents.shape()[0] != o_a.shape()[0]) {
    throw InvalidArgument("IFAM agents and stage-1 output differ in count");
  }
  ag::Var scores = ag::Scale(ag::Matmul(q, ag::Transpose(agents)),
                             1.0 / std::sqrt(static_cast<double>(d)));
  return ag::Matmul(ag::Sigmoid(ag::AddRowVector(scores, b_bwd)), o_a);
}

Tensor IfamStage2(const Tensor& q, const Tensor& agents, const Tensor& o_a,
                  const Tensor& b_bwd) {
  return IfamStage2(ag::Constant(q), ag::Constant(agents), ag::Constant(o_a),
                    ag::Constant(b_bwd))
      .value();
}

ag::Var Ifam(const ag::Var& features, const ag::Var& bank_rows,
             const IfamWeights<ag::Var>& w, IfamTrace* trace) {
  const Shape fs = features.shape();
  QkvGraph qkv = ProjectQkv(features, w);
  ag::Var agents = ag::Matmul(bank_rows, ag::Transpose(w.wq));
  if (w.b_fwd.value().size() != agents.shape()[0]) {
    throw InvalidArgument("IFAM biases sized for " +
                          std::to_string(w.b_fwd.value().size()) +
                          " agents, bank has " +
                          std::to_string(agents.shape()[0]));
  }
  ag::Var o_a = IfamStage1(agents, qkv.k, qkv.v, w.b_fwd);
  ag::Var y = IfamStage2(qkv.q, agents, o_a, w.b_bwd);
  if (trace) {
    trace->agents = agents.value();
    trace->o_a = o_a.value();
    trace->y = y.value();
  }
  // [L, d] -> [L, C] -> [C, H, W].
  ag::Var back = ag::Transpose(ag::Matmul(y, ag::Transpose(w.wo)));
  return ag::Reshape(back, fs);
}

ag::Var DafmForward(const ag::Var& features, const ag::Var& density,
                    const DafmWeights<ag::Var>& w, const DafmConfig& cfg,
                    DafmTrace* trace) {
  RequireChw(features.value(), "DAFM features");
  const std::size_t c = features.shape()[0];
  const std::size_t h = features.shape()[1], wd = features.shape()[2];
  ag::Var local = ag::DepthwiseSeparableConv(features, w.dw, w.pw);

  ag::Var resized = ag::BilinearResize(density, h, wd);
  const DensityMap level(resized.value());
  RefinedMask refined =
      RefineMask(ThresholdMask(level, cfg.threshold), cfg.kmeans);
  if (trace) {
    trace->mask = refined.mask;
    trace->regions = refined.regions;
    trace->fallback = refined.regions.empty();
  }
  if (refined.regions.empty()) return local;

  ag::Var mask = ag::StopGradientBarrier(resized, refined.mask.values(),
                                         "region_select");
  ag::Var bank = FocusBank(features, mask, w.bank);
  if (trace) trace->bank = bank.value();
  const Shape bs = bank.shape();
  ag::Var bank_rows = ag::Transpose(ag::Reshape(bank, {c, bs[1] * bs[2]}));
  ag::Var y = Ifam(features, bank_rows, w.ifam, trace ? &trace->ifam : nullptr);
  return ag::Add(y, local);
}

namespace {

// Inference-only IFAM. Gates are formed one agent (stage 1) or one pixel
// (stage 2) at a time, so memory is O((L + n) d) rather than O(L n). Every
// product and sum runs in the order the graph ops use, so the result is
// bit-identical to Ifam().
Tensor IfamStreaming(const Tensor& features, const Tensor& bank_rows,
                     const IfamWeights<Tensor>& w, IfamTrace* trace) {
  const std::size_t c = features.dim(0);
  const std::size_t l = features.dim(1) * features.dim(2);
  if (w.wq.dim(1) != c) {
    throw InvalidArgument("IFAM projections expect " + std::to_string(w.wq.dim(1)) +
                          " channels, got " + std::to_string(c));
  }
  const Tensor rows = ops::Transpose(features.Reshaped({c, l}));
  const Tensor q = ops::Matmul(rows, ops::Transpose(w.wq));
  const Tensor k = ops::Matmul(rows, ops::Transpose(w.wk));
  const Tensor v = ops::Matmul(rows, ops::Transpose(w.wv));
  const Tensor agents = ops::Matmul(bank_rows, ops::Transpose(w.wq));
  const std::size_t n = agents.dim(0), d = agents.dim(1);
  if (w.b_fwd.size() != n) {
    throw InvalidArgument("IFAM biases sized for " + std::to_string(w.b_fwd.size()) +
                          " agents, bank has " + std::to_string(n));
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));

  Tensor o_a({n, d});
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t j = 0; j < l; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < d; ++p) s += agents[a * d + p] * k[j * d + p];
      const double g = ops::Sigmoid(s * scale + w.b_fwd[a]);
      for (std::size_t p = 0; p < d; ++p) o_a[a * d + p] += g * v[j * d + p];
    }
  }
  ops::CountMacs(2 * n * l * d);

  Tensor y({l, d});
  std::vector<double> gate(n);
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t a = 0; a < n; ++a) {
      double s = 0.0;
      for (std::size_t p = 0; p < d; ++p) s += q[i * d + p] * agents[a * d + p];
      gate[a] = ops::Sigmoid(s * scale + w.b_bwd[a]);
    }
    for (std::size_t p = 0; p < d; ++p) {
      double acc = 0.0;
      for (std::size_t a = 0; a < n; ++a) acc += gate[a] * o_a[a * d + p];
      y[i * d + p] = acc;
    }
  }
  ops::CountMacs(2 * n * l * d);

  const Tensor back = ops::Transpose(ops::Matmul(y, ops::Transpose(w.wo)));
  if (trace) {
    trace->agents = agents;
    trace->o_a = std::move(o_a);
    trace->y = std::move(y);
  }
  return back.Reshaped(features.shape());
}

}  // namespace

Tensor DafmForward(const Tensor& features, const DensityMap& density,
                   const DafmWeights<Tensor>& w, const DafmConfig& cfg,
                   DafmTrace* trace) {
  RequireChw(features, "DAFM features");
  const std::size_t c = features.dim(0), h = features.dim(1), wd = features.dim(2);
  Tensor local = ops::DepthwiseSeparableConv(features, w.dw, w.pw);

  const DensityMap level(ops::BilinearResize(density.values(), h, wd));
  RefinedMask refined = RefineMask(ThresholdMask(level, cfg.threshold), cfg.kmeans);
  if (trace) {
    trace->mask = refined.mask;
    trace->regions = refined.regions;
    trace->fallback = refined.regions.empty();
  }
  if (refined.regions.empty()) return local;

  const Tensor bank = FocusBank(features, refined.mask, w.bank);
  if (trace) trace->bank = bank;
  const Tensor bank_rows = ops::Transpose(bank.Reshaped({c, bank.dim(1) * bank.dim(2)}));
  const Tensor y = IfamStreaming(features, bank_rows, w.ifam, trace ? &trace->ifam : nullptr);
  return ops::Add(y, local);
}

Tensor GlobalSelfAttention(const Tensor& features, const IfamWeights<Tensor>& w) {
  RequireChw(features, "GlobalSelfAttention features");
  const std::size_t c = features.dim(0);
  const std::size_t l = features.dim(1) * features.dim(2);
  const Tensor rows = ops::Transpose(features.Reshaped({c, l}));
  const Tensor q = ops::Matmul(rows, ops::Transpose(w.wq));
  const Tensor k = ops::Matmul(rows, ops::Transpose(w.wk));
  const Tensor v = ops::Matmul(rows, ops::Transpose(w.wv));
  const std::size_t d = q.dim(1);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  Tensor y({l, d});
  std::vector<double> score(l);
  for (std::size_t i = 0; i < l; ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < l; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < d; ++p) acc += q.at(i, p) * k.at(j, p);
      score[j] = acc * scale;
      m = std::max(m, score[j]);
    }
    double z = 0.0;
    for (std::size_t j = 0; j < l; ++j) {
      score[j] = std::exp(score[j] - m);
      z += score[j];
    }
    for (std::size_t j = 0; j < l; ++j) {
      const double a = score[j] / z;
      for (std::size_t p = 0; p < d; ++p) y.at(i, p) += a * v.at(j, p);
    }
  }
  ops::CountMacs(2 * l * l * d);
  const Tensor back = ops::Transpose(ops::Matmul(y, ops::Transpose(w.wo)));
  return back.Reshaped(features.shape());
}

}  // namespace densefocus
