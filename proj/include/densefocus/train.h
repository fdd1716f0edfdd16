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
#ifndef DENSEFOCUS_TRAIN_H_
#define DENSEFOCUS_TRAIN_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "densefocus/density.h"
#include "densefocus/synthgen.h"
#include "densefocus/tensor.h"

namespace densefocus {

struct TrainDemoConfig {
  std::size_t steps = 200;
  double lr = 0.05;
  std::uint64_t seed = 7;
  std::size_t scenes = 8;
  std::size_t image_size = 64;
  DgbConfig dgb;
};

struct TrainingExample {
  Tensor image;       // [1,S,S]
  DensityMap target;  // gt density at full resolution
};

// The micro corpus: `scenes` synthetic images with their gt densities,
// seeded from cfg.seed.
std::vector<TrainingExample> MakeTrainingCorpus(const TrainDemoConfig& cfg);

struct TrainTrace {
  // losses[i] is the mean density loss before step i; the last entry is the
  // loss after the final step, so the trace has steps + 1 entries.
  std::vector<double> losses;
  DgbWeights<Tensor> weights;
};

// Fits the density branch to the corpus with plain gradient descent on the
// mean density loss. Throws NumericError if the loss becomes non-finite.
TrainTrace TrainDemo(const TrainDemoConfig& cfg);

std::string TraceCsv(const std::vector<double>& losses);

}  // namespace densefocus

#endif  // DENSEFOCUS_TRAIN_H_
