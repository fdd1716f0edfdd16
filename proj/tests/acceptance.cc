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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "densefocus/cli.h"
#include "densefocus/dafm.h"
#include "densefocus/density.h"
#include "densefocus/dffm.h"
#include "densefocus/evalkit.h"
#include "densefocus/gradcheck_suite.h"
#include "densefocus/io.h"
#include "densefocus/ops.h"
#include "densefocus/region_select.h"
#include "densefocus/rng.h"
#include "densefocus/train.h"
#include "eval_cases.h"
#include "op_cases.h"
#include "oracles.h"

namespace densefocus {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string Fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

Outcome RefineMaskExhaustive() {
  std::size_t mismatches = 0;
  for (std::uint32_t bits = 0; bits < (1u << 16); ++bits) {
    BinaryMask m = BinaryMask::Zeros(4, 4);
    for (std::size_t i = 0; i < 16; ++i) m.set(i / 4, i % 4, (bits >> i) & 1u);
    const BinaryMask r = RefineMask(m).mask;
    std::uint16_t got = 0;
    for (std::size_t i = 0; i < 16; ++i) {
      if (r.at(i / 4, i % 4)) got |= static_cast<std::uint16_t>(1u << i);
    }
    if (got != oracle::RefineMask4x4(static_cast<std::uint16_t>(bits))) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + " of 65536 masks differ"};
}

double SumSquares(const Tensor& t) {
  double s = 0.0;
  for (double v : t.vec()) s += v * v;
  return s;
}

Outcome DctSuite() {
  double round = 0.0, parseval = 0.0, naive = 0.0;
  std::uint64_t seed = 1;
  for (std::size_t h : {1, 2, 3, 5, 8, 13, 16, 31, 32}) {
    for (std::size_t w : {1, 4, 7, 32}) {
      const Tensor x = oracle::RandomTensor({2, h, w}, seed++);
      const Tensor f = ops::Dct2(x);
      round = std::max(round, MaxAbsDiff(ops::Idct2(f), x));
      parseval = std::max(parseval, std::abs(SumSquares(f) - SumSquares(x)) / SumSquares(x));
      naive = std::max(naive, MaxAbsDiff(f, oracle::Dct2(x)));
      naive = std::max(naive, MaxAbsDiff(ops::Idct2(x), oracle::Idct2(x)));
    }
  }
  return {round < 1e-9 && parseval < 1e-12 && naive < 1e-9,
          "round trip " + Fmt("%.2e", round) + ", Parseval " + Fmt("%.2e", parseval) +
              ", definition " + Fmt("%.2e", naive)};
}

Outcome FrequencyConservation() {
  bool exact = true;
  double spectrum = 0.0, recon = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::size_t c = 1 + seed % 4, h = 3 + seed % 11, w = 4 + (seed * 7) % 13;
    const Tensor p = oracle::RandomTensor({c, h, w}, seed, -3.0, 3.0);
    const FrequencyMasksGraph m =
        FrequencyMasks(ag::Constant(p), ag::Constant(oracle::RandomTensor({1, h, w}, seed + 100, 0.0, 1.0)),
                       ag::Constant(oracle::RandomTensor({1, c, 1, 1}, seed + 200, -2.0, 2.0)),
                       ag::Constant(oracle::RandomTensor({1}, seed + 300)));
    const std::vector<double>& lo = m.low.value().vec();
    const std::vector<double>& hi = m.high.value().vec();
    for (std::size_t i = 0; i < lo.size(); ++i) exact = exact && lo[i] + hi[i] == 1.0;
    const FrequencyPair f = FrequencySplit(p, m.low.value(), m.high.value());
    spectrum = std::max(spectrum, MaxAbsDiff(ops::Add(f.f_low, f.f_high), ops::Dct2(p)));
    recon = std::max(recon, MaxAbsDiff(ops::Add(ops::Idct2(f.f_low), ops::Idct2(f.f_high)), p));
  }
  return {exact && spectrum < 1e-9 && recon < 1e-9,
          std::string(exact ? "masks sum to 1 exactly" : "mask sum not exact") + ", spectrum " +
              Fmt("%.2e", spectrum) + ", reconstruction " + Fmt("%.2e", recon)};
}

Outcome GradientChecks() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::string worst_name;
  std::size_t graphs = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    for (const test_support::OpCase& c : test_support::DifferentiableOpCases(seed)) {
      const double e = GradCheck(c.fn, c.point, 1e-6, seed).max_rel_error;
      ++graphs;
      if (e >= worst) {
        worst = e;
        worst_name = c.name;
      }
    }
    for (const std::string& module : GradCheckModules()) {
      const GradCheckCase c = MakeGradCheckCase(module, seed);
      const double e = GradCheck(c.fn, c.point, 1e-6, seed).max_rel_error;
      ++graphs;
      if (e >= worst) {
        worst = e;
        worst_name = module;
      }
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst < kGradCheckTolerance && secs < 300.0,
          std::to_string(graphs) + " graphs, worst " + Fmt("%.2e", worst) + " (" + worst_name +
              "), " + Fmt("%.1f s", secs)};
}

BBoxAnnotation BoxAt(double x, double y, double w, double h) {
  return BBoxAnnotation::FromBox(1, 1, {x, y, w, h});
}

Outcome DensityMass() {
  SplitMix64 rng(11);
  double lo = 1e9, hi = -1e9;
  for (int trial = 0; trial < 200; ++trial) {
    const double gamma = rng.Uniform(2.0, 8.0);
    const double aspect = rng.Uniform(0.2, 1.0);
    const double w = 2.0 * gamma / std::sqrt(1.0 + aspect * aspect), h = aspect * w;
    const double reach = std::ceil(3.0 * gamma) + 1.0;
    const double cx = rng.Uniform(reach, 64.0 - reach), cy = rng.Uniform(reach, 64.0 - reach);
    const std::vector<BBoxAnnotation> a = {BoxAt(cx - w / 2, cy - h / 2, w, h)};
    const double mass = GtDensity(a, 64, 64).density.mass();
    lo = std::min(lo, mass);
    hi = std::max(hi, mass);
  }
  bool scenes = true;
  for (std::size_t n = 1; n <= 20; ++n) {
    std::vector<BBoxAnnotation> a;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = rng.Uniform(4.0, 12.0), h = rng.Uniform(4.0, 12.0);
      const double reach = std::ceil(1.5 * std::hypot(w, h)) + 1.0;
      a.push_back(BoxAt(rng.Uniform(reach, 128.0 - reach) - w / 2,
                        rng.Uniform(reach, 128.0 - reach) - h / 2, w, h));
    }
    const double mass = GtDensity(a, 128, 128).density.mass() / static_cast<double>(n);
    scenes = scenes && mass >= 0.985 && mass <= 1.001;
  }
  std::vector<BBoxAnnotation> a, shifted;
  for (int i = 0; i < 6; ++i) {
    const double w = static_cast<double>(rng.UniformInt(3, 9));
    const double h = static_cast<double>(rng.UniformInt(3, 9));
    const double x = static_cast<double>(rng.UniformInt(20, 50));
    const double y = static_cast<double>(rng.UniformInt(25, 50));
    a.push_back(BoxAt(x, y, w, h));
    shifted.push_back(BoxAt(x + 7, y - 5, w, h));
  }
  const Tensor m = GtDensity(a, 96, 96).density.values();
  const Tensor s = GtDensity(shifted, 96, 96).density.values();
  bool translation = true;
  for (std::size_t r = 5; r < 96; ++r) {
    for (std::size_t c = 0; c + 7 < 96; ++c) {
      translation = translation && s.at(0, r - 5, c + 7) == m.at(0, r, c);
    }
  }
  return {lo >= 0.985 && hi <= 1.001 && scenes && translation,
          "single-object mass in [" + Fmt("%.5f", lo) + ", " + Fmt("%.5f", hi) + "], " +
              (scenes ? "n-object scenes in range" : "n-object scene out of range") + ", " +
              (translation ? "translation bit-exact" : "translation differs")};
}

Outcome ComputeReduction() {
  const std::size_t c = 32, n = 64;
  const IfamWeights<Tensor> w = InitIfam(c, c, n, 1, "ifam.");
  const IfamWeights<ag::Var> wv = Lift(w, false);
  const Tensor bank = oracle::RandomTensor({n, c}, 2);
  auto ifam = [&](std::size_t side) {
    const Tensor x = oracle::RandomTensor({c, side, side}, side);
    ops::MacScope scope;
    Ifam(ag::Constant(x), ag::Constant(bank), wv);
    return static_cast<double>(scope.count());
  };
  const double c32 = ifam(32), c64 = ifam(64), c128 = ifam(128);
  double global = 0.0;
  {
    const Tensor x = oracle::RandomTensor({c, 64, 64}, 64);
    ops::MacScope scope;
    GlobalSelfAttention(x, w);
    global = static_cast<double>(scope.count());
  }
  const double share = c64 / global, r1 = c64 / c32, r2 = c128 / c64;
  const bool linear = std::abs(r1 / 4.0 - 1.0) <= 0.05 && std::abs(r2 / 4.0 - 1.0) <= 0.05;
  return {share <= 0.25 && linear,
          "IFAM/global at 64x64 " + Fmt("%.4f", share) + ", scaling " + Fmt("%.3f", r1) + " and " +
              Fmt("%.3f", r2) + " per 4x pixels"};
}

Outcome Evaluator() {
  double gap = 0.0;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    const test_support::EvalScene s = test_support::RandomEvalScene(seed);
    EvalOptions opts;
    opts.max_dets = seed % 3 == 0 ? 4 : kDefaultMaxDets;
    gap = std::max(gap, test_support::OracleReportGap(s, ApReport(s.dets, s.gts, opts), opts.max_dets));
  }
  bool perfect = true;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const test_support::EvalScene s = test_support::RandomEvalScene(seed);
    std::vector<Detection> dets;
    for (const BBoxAnnotation& g : s.gts) dets.push_back({g.image_id, g.category_id, g.box(), 1.0});
    const APReport r = ApReport(dets, s.gts);
    for (double v : {r.ap, r.ap50, r.ap75, r.ap_vt, r.ap_t, r.ap_s, r.ap_m}) {
      perfect = perfect && (v == 1.0 || v == kNoGroundTruth);
    }
    for (const auto& [cat, ap] : r.per_category) perfect = perfect && ap == 1.0;
  }
  bool partition = true;
  SplitMix64 rng(5);
  for (int i = 0; i < 100000; ++i) {
    const double area = rng.Uniform(1e-6, 40.0) * rng.Uniform(1e-6, 40.0);
    partition = partition && kAreaVeryTiny.contains(area) + kAreaTiny.contains(area) +
                                     kAreaSmall.contains(area) + kAreaMedium.contains(area) ==
                                 1;
  }
  for (double edge : {64.0, 256.0, 1024.0}) {
    partition = partition && kAreaVeryTiny.contains(edge) + kAreaTiny.contains(edge) +
                                     kAreaSmall.contains(edge) + kAreaMedium.contains(edge) ==
                                 1;
  }
  return {gap <= 1e-12 && perfect && partition,
          "1000 scenes, max oracle gap " + Fmt("%.2e", gap) + ", " +
              (perfect ? "perfect detections score 1" : "perfect detections below 1") + ", " +
              (partition ? "buckets partition" : "buckets overlap")};
}

Outcome KernelSets() {
  const std::vector<std::vector<std::size_t>> sets = {{3, 5, 7},    {5, 7, 9},    {3, 6, 9},
                                                      {6, 9, 12},   {6, 7, 8},    {6, 7, 8, 9},
                                                      {3, 5, 7, 9}, {3, 6, 9, 12}};
  const Tensor p = oracle::RandomTensor({4, 72, 72}, 1);
  const DensityMap d(oracle::RandomTensor({1, 72, 72}, 2, 0.0, 1.0));
  std::size_t ok = 0;
  for (const auto& k : sets) {
    DffmConfig cfg;
    cfg.channels = 4;
    cfg.kernels = k;
    try {
      const Tensor y = DffmForward(p, d, InitDffm(cfg, 3), cfg);
      if (y.shape() == p.shape() && y.AllFinite()) ++ok;
    } catch (const std::exception&) {
    }
  }
  return {ok == sets.size(), std::to_string(ok) + " of " + std::to_string(sets.size()) +
                                 " kernel sets ran with shape preserved"};
}

Outcome TrainDemoDrop() {
  TrainDemoConfig cfg;
  cfg.seed = 7;
  cfg.steps = 200;
  const TrainTrace a = TrainDemo(cfg);
  const TrainTrace b = TrainDemo(cfg);
  const double first = a.losses.front(), last = a.losses.back();
  const bool same = a.losses == b.losses;
  return {last <= 0.5 * first && same,
          "loss " + Fmt("%.4e", first) + " -> " + Fmt("%.4e", last) + " (" +
              Fmt("%.1f%% drop", 100.0 * (1.0 - last / first)) + "), " +
              (same ? "trace identical across runs" : "traces differ")};
}

int Cli(std::vector<std::string> args, std::string* stdout_text = nullptr) {
  args.insert(args.begin(), "densefocus");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (stdout_text) *stdout_text = out.str();
  if (code != kExitOk) std::fprintf(stderr, "%s", err.str().c_str());
  return code;
}

bool RunPipeline(const fs::path& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string d = dir.string();
  io::WriteFile(dir / "spec.json",
                R"({"width": 64, "height": 64, "n_clusters": 2, "objects_per_cluster": 8,
                    "cluster_spread": 6.0})");
  std::string report;
  const bool ok =
      Cli({"--seed", "5", "synth", "--spec", d + "/spec.json", "--out-dir", d + "/scene"}) == 0 &&
      Cli({"gt-density", "--annotations", d + "/scene/annotations.json", "--out",
           d + "/density.drmt", "--heatmap", d + "/density.pgm"}) == 0 &&
      Cli({"select-regions", "--density", d + "/density.drmt", "--out-dir", d + "/regions"}) == 0 &&
      Cli({"--seed", "5", "dafm", "--features", d + "/scene/image.drmt", "--density",
           d + "/density.drmt", "--out", d + "/dafm.drmt", "--save-params", d + "/dafm.json", "--dump-dir", d + "/dafm",
           "--heatmap", d + "/dafm.pgm"}) == 0 &&
      Cli({"--seed", "5", "dffm", "--features", d + "/dafm.drmt", "--density",
           d + "/density.drmt", "--out", d + "/dffm.drmt", "--save-params", d + "/dffm.json",
           "--dump-paths", d + "/paths"}) ==
          0 &&
      Cli({"eval", "--gt", d + "/scene/annotations.json", "--dets", d + "/scene/detections.json",
           "--csv", d + "/report.csv"},
          &report) == 0;
  if (ok) io::WriteFile(dir / "report.json", report);
  return ok;
}

Outcome EndToEndDeterminism() {
  const fs::path root = fs::temp_directory_path() / "densefocus_acceptance";
  const bool ran = RunPipeline(root / "a") && RunPipeline(root / "b");
  if (!ran) return {false, "pipeline failed"};
  std::size_t files = 0, differ = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    ++files;
    const fs::path other = root / "b" / fs::relative(e.path(), root / "a");
    if (!fs::exists(other) || io::ReadFile(e.path()) != io::ReadFile(other)) ++differ;
  }
  fs::remove_all(root);
  return {files >= 12 && differ == 0,
          std::to_string(files) + " files compared, " + std::to_string(differ) + " differ"};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
  double budget_s = 0.0;  // 0: no time limit
};

}  // namespace
}  // namespace densefocus

int main() {
  using namespace densefocus;
  const std::vector<Criterion> criteria = {
      {"refine-mask-exhaustive", RefineMaskExhaustive, 60.0},
      {"dct-suite", DctSuite},
      {"frequency-conservation", FrequencyConservation},
      {"gradient-checks", GradientChecks, 300.0},
      {"density-mass", DensityMass},
      {"compute-reduction", ComputeReduction},
      {"evaluator", Evaluator},
      {"kernel-sets", KernelSets},
      {"train-demo", TrainDemoDrop},
      {"end-to-end-determinism", EndToEndDeterminism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0.0 && secs >= c.budget_s) {
      o.pass = false;
      o.detail += ", over the time budget";
    }
    std::printf("%s %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
