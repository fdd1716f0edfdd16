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
#include "densefocus/dffm.h"

#include <algorithm>
#include <sstream>

#include "densefocus/errors.h"
#include "densefocus/ops.h"

namespace densefocus {

std::vector<std::size_t> ParseKernelSet(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
    if (item.empty()) continue;
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size() || v <= 0) {
      throw InvalidArgument("bad kernel extent '" + item + "'");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

EdhWeights<Tensor> InitEdh(std::size_t channels, const DffmConfig& cfg,
                           std::uint64_t seed, const std::string& name) {
  EdhWeights<Tensor> w;
  w.mask_w = InitUniform(seed, name + "mask_w", {1, channels, 1, 1}, channels);
  w.mask_b = InitUniform(seed, name + "mask_b", {1}, channels);
  w.ca = InitChannelAttention(channels, cfg.reduction, seed, name + "ca.");
  w.sa = InitSpatialAttention(cfg.spatial_kernel, seed, name + "sa.");
  w.cross_h = InitUniform(seed, name + "cross_h", {channels, channels}, channels);
  w.cross_l = InitUniform(seed, name + "cross_l", {channels, channels}, channels);
  return w;
}

DffmWeights<Tensor> InitDffm(const DffmConfig& cfg, std::uint64_t seed) {
  const std::size_t c = cfg.channels;
  if (c == 0) throw InvalidArgument("DFFM needs at least one channel");
  DffmWeights<Tensor> w;
  w.cal = InitCalibration(seed, cfg.calibration_channels, "dffm.cal.");
  for (std::size_t i = 0; i < cfg.kernels.size(); ++i) {
    w.paths.push_back(
        InitEdh(c, cfg, seed, "dffm.path" + std::to_string(i) + "."));
  }
  w.conv_w = InitUniform(seed, "dffm.conv.w", {c, c, 3, 3}, c * 9);
  w.conv_b = InitUniform(seed, "dffm.conv.b", {c}, c * 9);
  w.agg_w = InitUniform(seed, "dffm.agg.w", {c, c, 1, 1}, c);
  w.agg_b = InitUniform(seed, "dffm.agg.b", {c}, c);
  return w;
}

namespace {

void RequireSamePlane(const ag::Var& x, const ag::Var& plane, const char* what) {
  const Shape& xs = x.shape();
  const Shape& ps = plane.shape();
  if (ps.size() != 3 || ps[0] != 1 || ps[1] != xs[1] || ps[2] != xs[2]) {
    throw InvalidArgument(std::string(what) + " " + ShapeToString(ps) +
                          " does not match features " + ShapeToString(xs));
  }
}

ag::Var Flat(const ag::Var& x) {
  const Shape& s = x.shape();
  return ag::Reshape(x, {s[0], s[1] * s[2]});
}

}  // namespace

FrequencyMasksGraph FrequencyMasks(const ag::Var& features,
                                   const ag::Var& density, const ag::Var& mask_w,
                                   const ag::Var& mask_b) {
  RequireChw(features.value(), "frequency-mask features");
  RequireSamePlane(features, density, "frequency-mask density");
  ag::Var low = ag::Sigmoid(
      ag::Conv2d(ag::MulChannels(features, density), mask_w, mask_b, 1, 0));
  return {low, ag::OneMinus(low)};
}

FrequencyPairGraph FrequencySplit(const ag::Var& features, const ag::Var& m_low,
                                  const ag::Var& m_high) {
  RequireChw(features.value(), "frequency-split features");
  RequireSamePlane(features, m_low, "low-frequency mask");
  RequireSamePlane(features, m_high, "high-frequency mask");
  ag::Var spectrum = ag::Dct2(features);
  return {ag::MulChannels(spectrum, m_low), ag::MulChannels(spectrum, m_high)};
}

FrequencyPair FrequencySplit(const Tensor& features, const Tensor& m_low,
                             const Tensor& m_high) {
  FrequencyPairGraph g = FrequencySplit(
      ag::Constant(features), ag::Constant(m_low), ag::Constant(m_high));
  return {g.low.value(), g.high.value()};
}

ag::Var Edh(const ag::Var& features, const FrequencyPairGraph& freq,
            const ag::Var& calibrated, const EdhWeights<ag::Var>& w,
            EdhTrace* trace) {
  RequireChw(features.value(), "EDH features");
  RequireSamePlane(features, calibrated, "EDH calibrated density");
  const Shape& s = features.shape();
  ag::Var low = ChannelAttention(ag::Idct2(freq.low), w.ca);
  ag::Var high = SpatialAttention(ag::Idct2(freq.high), w.sa);
  ag::Var hv = ag::Reshape(ag::Matmul(w.cross_h, Flat(high)), s);
  ag::Var lv = ag::Reshape(ag::Matmul(w.cross_l, Flat(low)), s);
  ag::Var hg = Flat(ag::MulChannels(hv, calibrated));
  ag::Var lg = Flat(ag::MulChannels(lv, ag::OneMinus(calibrated)));
  ag::Var affinity = ag::Softmax(ag::Matmul(hg, ag::Transpose(lg)), 1);
  if (trace) trace->affinity = affinity.value();
  ag::Var mixed = ag::Reshape(ag::Matmul(affinity, Flat(features)), s);
  return ag::AddChannels(mixed, calibrated);
}

ag::Var DffmForward(const ag::Var& features, const ag::Var& density,
                    const DffmWeights<ag::Var>& w, const DffmConfig& cfg,
                    DffmTrace* trace) {
  RequireChw(features.value(), "DFFM features");
  const std::size_t h = features.shape()[1], wd = features.shape()[2];
  if (w.paths.size() != cfg.kernels.size()) {
    throw InvalidArgument("DFFM weights have " + std::to_string(w.paths.size()) +
                          " paths but the kernel set has " +
                          std::to_string(cfg.kernels.size()));
  }
  for (std::size_t k : cfg.kernels) {
    if (k == 0 || k > std::min(h, wd)) {
      throw InvalidArgument("pooling kernel " + std::to_string(k) +
                            " exceeds feature extent " + std::to_string(h) +
                            "x" + std::to_string(wd));
    }
  }
  ag::Var calibrated = CalibrateDensity(density, w.cal);

  std::vector<ag::Var> outputs;
  for (std::size_t i = 0; i < cfg.kernels.size(); ++i) {
    ag::Var pooled = ag::AvgPool(features, cfg.kernels[i]);
    const std::size_t ph = pooled.shape()[1], pw = pooled.shape()[2];
    ag::Var d_path = ag::BilinearResize(density, ph, pw);
    ag::Var cal_path = ag::BilinearResize(calibrated, ph, pw);
    const EdhWeights<ag::Var>& ew = w.paths[i];
    FrequencyMasksGraph masks =
        FrequencyMasks(pooled, d_path, ew.mask_w, ew.mask_b);
    FrequencyPairGraph freq = FrequencySplit(pooled, masks.low, masks.high);
    EdhTrace et;
    ag::Var path = Edh(pooled, freq, cal_path, ew, &et);
    if (trace) {
      trace->path_outputs.push_back(path.value());
      trace->affinities.push_back(et.affinity);
    }
    outputs.push_back(ag::BilinearResize(path, h, wd));
  }
  ag::Var conv = ag::Conv2d(features, w.conv_w, w.conv_b, 1, 1);
  if (trace) trace->conv_path = conv.value();
  outputs.push_back(conv);

  ag::Var total = outputs.front();
  for (std::size_t i = 1; i < outputs.size(); ++i) total = ag::Add(total, outputs[i]);
  return ag::Conv2d(total, w.agg_w, w.agg_b, 1, 0);
}

Tensor DffmForward(const Tensor& features, const DensityMap& density,
                   const DffmWeights<Tensor>& w, const DffmConfig& cfg,
                   DffmTrace* trace) {
  return DffmForward(ag::Constant(features), ag::Constant(density.values()),
                     Lift(w, false), cfg, trace)
      .value();
}

}  // namespace densefocus
