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
#include "densefocus/train.h"

#include <cmath>
#include <cstdio>

#include "densefocus/autodiff.h"
#include "densefocus/errors.h"
#include "densefocus/params.h"
#include "densefocus/rng.h"

namespace densefocus {

std::vector<TrainingExample> MakeTrainingCorpus(const TrainDemoConfig& cfg) {
  SplitMix64 seeds(cfg.seed ^ HashName("train.corpus"));
  std::vector<TrainingExample> corpus;
  for (std::size_t i = 0; i < cfg.scenes; ++i) {
    SceneSpec spec;
    spec.width = spec.height = cfg.image_size;
    spec.n_clusters = 2;
    spec.objects_min = 2;
    spec.objects_max = 5;
    spec.size_min = 4;
    spec.size_max = 10;
    spec.cluster_spread = 5.0;
    spec.image_id = static_cast<std::int64_t>(i + 1);
    spec.seed = seeds.Next();
    Scene scene = GenerateScene(spec);
    DensityMap target = GtDensity(scene.annotations, cfg.image_size, cfg.image_size).density;
    corpus.push_back({std::move(scene.image), std::move(target)});
  }
  return corpus;
}

namespace {

template <class W, class Leaf>
std::vector<Leaf*> Leaves(W& weights) {
  std::vector<Leaf*> out;
  W::Visit(weights, [&](const std::string&, Leaf& leaf) { out.push_back(&leaf); });
  return out;
}

}  // namespace

TrainTrace TrainDemo(const TrainDemoConfig& cfg) {
  if (!(cfg.lr >= 0.0) || !std::isfinite(cfg.lr)) throw InvalidArgument("lr must be finite and >= 0");
  const std::vector<TrainingExample> corpus = MakeTrainingCorpus(cfg);
  TrainTrace trace;
  trace.weights = InitDgb(cfg.dgb, cfg.seed);
  const double inv_n = 1.0 / static_cast<double>(corpus.size());

  for (std::size_t step = 0;; ++step) {
    DgbWeights<ag::Var> vars = Lift(trace.weights, /*trainable=*/true);
    ag::Var total;
    for (const TrainingExample& ex : corpus) {
      ag::Var pred = DgbForward(ag::Constant(ex.image), vars, cfg.dgb);
      ag::Var loss = DensityLoss(pred, ag::Constant(ex.target.values()));
      total = total.defined() ? ag::Add(total, loss) : loss;
    }
    total = ag::Scale(total, inv_n);
    const double loss = total.value().item();
    if (!std::isfinite(loss)) {
      throw NumericError("train-demo loss became non-finite at step " + std::to_string(step));
    }
    trace.losses.push_back(loss);
    if (step == cfg.steps) break;

    const ag::Gradients grads = ag::Backward(total);
    std::vector<Tensor*> params = Leaves<DgbWeights<Tensor>, Tensor>(trace.weights);
    std::vector<ag::Var*> leaves = Leaves<DgbWeights<ag::Var>, ag::Var>(vars);
    for (std::size_t i = 0; i < params.size(); ++i) {
      const Tensor g = grads.of(*leaves[i]);
      auto p = params[i]->data();
      auto gd = g.data();
      for (std::size_t j = 0; j < p.size(); ++j) p[j] -= cfg.lr * gd[j];
    }
  }
  return trace;
}

std::string TraceCsv(const std::vector<double>& losses) {
  std::string out = "step,loss\n";
  char buf[64];
  for (std::size_t i = 0; i < losses.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i, losses[i]);
    out += buf;
  }
  return out;
}

}  // namespace densefocus
