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
#include "densefocus/cli.h"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "densefocus/dafm.h"
#include "densefocus/density.h"
#include "densefocus/dffm.h"
#include "densefocus/errors.h"
#include "densefocus/evalkit.h"
#include "densefocus/gradcheck_suite.h"
#include "densefocus/io.h"
#include "densefocus/ops.h"
#include "densefocus/params.h"
#include "densefocus/region_select.h"
#include "densefocus/rng.h"
#include "densefocus/synthgen.h"
#include "densefocus/train.h"

namespace densefocus {

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  bool verbose = false;

  std::uint64_t SeedOr(std::uint64_t fallback) const { return seed.value_or(fallback); }
};

struct Context {
  const GlobalOptions& global;
  std::ostream& out;
  std::ostream& err;

  void Log(const std::string& line) const {
    if (global.verbose) err << line << "\n";
  }
};

void RequireFinite(const Tensor& t, const std::string& what) {
  if (!t.AllFinite()) throw NumericError(what + " contains non-finite values");
}

Tensor LoadFeatures(const fs::path& path) {
  Tensor t = io::ReadTensor(path);
  if (t.rank() == 2) t = t.Reshaped({1, t.dim(0), t.dim(1)});
  RequireChw(t, "features");
  RequireFinite(t, path.string());
  return t;
}

DensityMap LoadDensity(const fs::path& path) {
  Tensor t = io::ReadTensor(path);
  if (t.rank() == 2) t = t.Reshaped({1, t.dim(0), t.dim(1)});
  RequireFinite(t, path.string());
  return DensityMap(std::move(t));
}

std::optional<ParamBundle> LoadParams(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return io::ParseBundle(io::ReadFile(path));
}

template <class W>
void SaveParams(const std::string& path, const W& weights, const std::string& prefix,
                std::uint64_t seed) {
  if (path.empty()) return;
  ParamBundle bundle;
  bundle.rng_seed = seed;
  ToBundle(weights, prefix, bundle);
  io::WriteFile(path, io::SerializeBundle(bundle));
}

ThresholdSpec MakeThreshold(double value, bool absolute) {
  return {absolute ? ThresholdMode::kAbsolute : ThresholdMode::kQuantile, value};
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string spec_path;
  std::string out_dir;
  double jitter = 2.0;
  double drop = 0.2;
  double score_noise = 0.05;
};

void RunSynth(const SynthArgs& a, const Context& ctx) {
  SceneSpec spec;
  if (!a.spec_path.empty()) spec = io::ParseSceneSpec(io::ReadFile(a.spec_path));
  if (ctx.global.seed) spec.seed = *ctx.global.seed;
  const Scene scene = GenerateScene(spec);
  RequireFinite(scene.image, "synthetic image");

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  io::WriteTensor(dir / "image.drmt", scene.image);
  io::WriteHeatmap(dir / "image.pgm", scene.image);
  io::AnnotationFile file;
  file.images.push_back({spec.image_id, spec.width, spec.height, "image.drmt"});
  file.categories.push_back({1, "object"});
  file.annotations = scene.annotations;
  io::WriteAnnotations(dir / "annotations.json", file);
  const std::vector<Detection> dets =
      PerturbDetections(scene.annotations, a.jitter, a.drop, a.score_noise,
                        spec.seed ^ HashName("synth.detections"));
  io::WriteFile(dir / "detections.json", io::SerializeDetections(dets));
  ctx.Log("synth: " + std::to_string(scene.annotations.size()) + " objects, " +
          std::to_string(dets.size()) + " detections");
}

struct GtDensityArgs {
  std::string annotations;
  std::string out;
  std::string heatmap;
  std::optional<std::int64_t> image_id;
};

void RunGtDensity(const GtDensityArgs& a, const Context& ctx) {
  const io::AnnotationFile file = io::ReadAnnotations(a.annotations);
  if (file.images.empty()) throw FormatError(a.annotations + ": no images");
  const io::ImageInfo* image = &file.images.front();
  if (a.image_id) {
    image = nullptr;
    for (const io::ImageInfo& im : file.images) {
      if (im.id == *a.image_id) image = &im;
    }
    if (image == nullptr) {
      throw InvalidArgument("no image with id " + std::to_string(*a.image_id));
    }
  }
  std::vector<BBoxAnnotation> anns;
  for (const BBoxAnnotation& ann : file.annotations) {
    if (ann.image_id == image->id) anns.push_back(ann);
  }
  const GtDensityResult result = GtDensity(anns, image->height, image->width);
  RequireFinite(result.density.values(), "density");
  io::WriteTensor(a.out, result.density.values());
  if (!a.heatmap.empty()) io::WriteHeatmap(a.heatmap, result.density.values());
  ctx.Log("gt-density: mass " + std::to_string(result.density.mass()) + ", skipped " +
          std::to_string(result.skipped));
}

struct ModelArgs {
  std::string params;
  std::string save_params;
  std::string out;
  std::string heatmap;
};

void RunCalibrate(const std::string& density_path, const ModelArgs& m, const Context& ctx) {
  const DensityMap density = LoadDensity(density_path);
  const std::uint64_t seed = ctx.global.SeedOr(0);
  CalibrationWeights<Tensor> w = InitCalibration(seed);
  if (auto bundle = LoadParams(m.params)) FromBundle(w, "", *bundle);
  const DensityMap calibrated = CalibrateDensity(density, w);
  RequireFinite(calibrated.values(), "calibrated density");
  io::WriteTensor(m.out, calibrated.values());
  if (!m.heatmap.empty()) io::WriteHeatmap(m.heatmap, calibrated.values());
  SaveParams(m.save_params, w, "", seed);
}

struct SelectArgs {
  std::string density;
  std::string out_dir;
  double threshold = 0.10;
  bool absolute = false;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

void RunSelectRegions(const SelectArgs& a, const Context& ctx) {
  DensityMap density = LoadDensity(a.density);
  if (a.rows != 0 || a.cols != 0) {
    if (a.rows == 0 || a.cols == 0) throw InvalidArgument("--rows and --cols go together");
    density = density.Resized(a.rows, a.cols);
  }
  const BinaryMask raw = ThresholdMask(density, MakeThreshold(a.threshold, a.absolute));
  const RefinedMask refined = RefineMask(raw);
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  io::WriteTensor(dir / "mask.drmt", refined.mask.values());
  io::WriteHeatmap(dir / "mask.pgm", refined.mask.values());
  io::WriteFile(dir / "regions.json", io::SerializeRegions(refined.regions));
  ctx.Log("select-regions: " + std::to_string(raw.count()) + " thresholded pixels, " +
          std::to_string(refined.regions.rectangles.size()) + " regions");
}

struct DafmArgs {
  std::string features;
  std::string density;
  double threshold = 0.10;
  bool absolute = false;
  std::size_t proj_dim = 0;
  std::string dump_dir;
};

void RunDafm(const DafmArgs& a, const ModelArgs& m, const Context& ctx) {
  const Tensor features = LoadFeatures(a.features);
  const DensityMap density = LoadDensity(a.density);
  DafmConfig cfg;
  cfg.channels = features.dim(0);
  cfg.proj_dim = a.proj_dim;
  cfg.threshold = MakeThreshold(a.threshold, a.absolute);
  const std::uint64_t seed = ctx.global.SeedOr(0);
  DafmWeights<Tensor> w = InitDafm(cfg, features.dim(1), features.dim(2), seed);
  if (auto bundle = LoadParams(m.params)) FromBundle(w, "dafm.", *bundle);
  DafmTrace trace;
  const Tensor y = DafmForward(features, density, w, cfg, &trace);
  RequireFinite(y, "dafm output");
  io::WriteTensor(m.out, y);
  if (!m.heatmap.empty()) io::WriteHeatmap(m.heatmap, ops::ChannelMean(y));
  if (!a.dump_dir.empty()) {
    const fs::path dir(a.dump_dir);
    fs::create_directories(dir);
    io::WriteTensor(dir / "mask.drmt", trace.mask.values());
    io::WriteTensor(dir / "bank.drmt", trace.bank);
    // Without regions no attention runs.
    if (!trace.fallback) io::WriteTensor(dir / "o_a.drmt", trace.ifam.o_a);
  }
  SaveParams(m.save_params, w, "dafm.", seed);
  ctx.Log("dafm: " + std::to_string(trace.regions.rectangles.size()) + " regions" +
          (trace.fallback ? " (local path only)" : ""));
}

struct DffmArgs {
  std::string features;
  std::string density;
  std::string kernels = "3,6,9";
  std::string dump_dir;
};

void RunDffm(const DffmArgs& a, const ModelArgs& m, const Context& ctx) {
  const Tensor features = LoadFeatures(a.features);
  const DensityMap density = LoadDensity(a.density);
  DffmConfig cfg;
  cfg.channels = features.dim(0);
  cfg.kernels = ParseKernelSet(a.kernels);
  const std::uint64_t seed = ctx.global.SeedOr(0);
  DffmWeights<Tensor> w = InitDffm(cfg, seed);
  if (auto bundle = LoadParams(m.params)) FromBundle(w, "dffm.", *bundle);
  DffmTrace trace;
  const Tensor y = DffmForward(features, density, w, cfg, &trace);
  RequireFinite(y, "dffm output");
  io::WriteTensor(m.out, y);
  if (!a.dump_dir.empty()) {
    const fs::path dir(a.dump_dir);
    fs::create_directories(dir);
    for (std::size_t i = 0; i < trace.path_outputs.size(); ++i) {
      io::WriteTensor(dir / ("path" + std::to_string(i) + ".drmt"), trace.path_outputs[i]);
    }
  }
  if (!m.heatmap.empty()) io::WriteHeatmap(m.heatmap, ops::ChannelMean(y));
  SaveParams(m.save_params, w, "dffm.", seed);
  ctx.Log("dffm: kernels " + a.kernels);
}

struct EvalArgs {
  std::string annotations;
  std::string detections;
  std::string csv;
  std::size_t max_dets = kDefaultMaxDets;
  bool dtod = false;
  double class_iou = 0.5;
};

std::string ReportCsv(const APReport& r) {
  std::ostringstream s;
  s.precision(17);
  s << "metric,value\n"
    << "AP," << r.ap << "\nAP50," << r.ap50 << "\nAP75," << r.ap75 << "\nAP_vt," << r.ap_vt
    << "\nAP_t," << r.ap_t << "\nAP_s," << r.ap_s << "\nAP_m," << r.ap_m << "\nTP," << r.tp
    << "\nFP," << r.fp << "\nFN," << r.fn << "\n";
  for (const auto& [cat, ap] : r.per_category) s << "AP_category_" << cat << "," << ap << "\n";
  return s.str();
}

void RunEval(const EvalArgs& a, const Context& ctx) {
  const io::AnnotationFile gt = io::ReadAnnotations(a.annotations);
  const std::vector<Detection> dets = io::ReadDetections(a.detections);
  EvalOptions opts;
  opts.max_dets = a.dtod ? kDtodMaxDets : a.max_dets;
  opts.class_iou = a.class_iou;
  const APReport report = ApReport(dets, gt.annotations, opts);
  ctx.out << io::SerializeReport(report);
  if (!a.csv.empty()) io::WriteFile(a.csv, ReportCsv(report));
}

struct GradCheckArgs {
  std::string module;
  std::size_t points = 3;
  double eps = 1e-6;
};

// Returns false when any point exceeds the tolerance.
bool RunGradCheck(const GradCheckArgs& a, const Context& ctx) {
  std::vector<std::string> modules;
  if (a.module == "all") {
    modules = GradCheckModules();
  } else {
    modules.push_back(a.module);
  }
  const std::uint64_t first = ctx.global.SeedOr(1);
  double worst = 0.0;
  char line[160];
  for (const std::string& module : modules) {
    for (std::size_t i = 0; i < a.points; ++i) {
      const std::uint64_t seed = first + i;
      const GradCheckCase c = MakeGradCheckCase(module, seed);
      const GradCheckResult r = GradCheck(c.fn, c.point, a.eps, seed);
      worst = std::max(worst, r.max_rel_error);
      std::snprintf(line, sizeof(line), "%s seed %llu: max rel error %.3e over %zu coordinates\n",
                    module.c_str(), static_cast<unsigned long long>(seed), r.max_rel_error,
                    r.coordinates_checked);
      ctx.out << line;
    }
  }
  std::snprintf(line, sizeof(line), "max rel error %.3e (tolerance %.0e)\n", worst,
                kGradCheckTolerance);
  ctx.out << line;
  return worst < kGradCheckTolerance;
}

struct TrainArgs {
  std::size_t steps = 200;
  double lr = 0.05;
  std::string out;
};

void RunTrainDemo(const TrainArgs& a, const Context& ctx) {
  TrainDemoConfig cfg;
  cfg.steps = a.steps;
  cfg.lr = a.lr;
  cfg.seed = ctx.global.SeedOr(cfg.seed);
  const TrainTrace trace = TrainDemo(cfg);
  const std::string csv = TraceCsv(trace.losses);
  if (a.out.empty()) {
    ctx.out << csv;
  } else {
    io::WriteFile(a.out, csv);
  }
  ctx.Log("train-demo: loss " + std::to_string(trace.losses.front()) + " -> " +
          std::to_string(trace.losses.back()));
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Density-guided dense tiny-object toolkit", "densefocus"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions global;
  std::uint64_t seed_value = 0;
  CLI::Option* seed_opt = app.add_option("--seed", seed_value, "RNG seed")->trigger_on_parse();
  app.add_flag("--verbose,-v", global.verbose, "Log progress to stderr");

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scene");
  synth_cmd->add_option("--spec", synth.spec_path, "Scene spec JSON")->check(CLI::ExistingFile);
  synth_cmd->add_option("--out-dir", synth.out_dir, "Output directory")->required();
  synth_cmd->add_option("--jitter", synth.jitter, "Detection jitter in pixels");
  synth_cmd->add_option("--drop", synth.drop, "Detection drop rate");
  synth_cmd->add_option("--score-noise", synth.score_noise, "Detection score noise");

  GtDensityArgs gtd;
  std::int64_t image_id = 0;
  CLI::App* gtd_cmd = app.add_subcommand("gt-density", "Render a ground-truth density map");
  gtd_cmd->add_option("--annotations", gtd.annotations)->required()->check(CLI::ExistingFile);
  gtd_cmd->add_option("--out", gtd.out, "Density tensor file")->required();
  gtd_cmd->add_option("--heatmap", gtd.heatmap, "Optional PGM heatmap");
  CLI::Option* image_opt = gtd_cmd->add_option("--image-id", image_id);

  auto add_model = [](CLI::App* cmd, ModelArgs& m) {
    cmd->add_option("--out", m.out, "Output tensor file")->required();
    cmd->add_option("--params", m.params, "Parameter bundle JSON")->check(CLI::ExistingFile);
    cmd->add_option("--save-params", m.save_params, "Write the parameters used");
    cmd->add_option("--heatmap", m.heatmap, "Optional PGM heatmap");
  };

  std::string cal_density;
  ModelArgs cal_model;
  CLI::App* cal_cmd = app.add_subcommand("calibrate", "Calibrate a density map");
  cal_cmd->add_option("--density", cal_density)->required()->check(CLI::ExistingFile);
  add_model(cal_cmd, cal_model);

  SelectArgs sel;
  CLI::App* sel_cmd = app.add_subcommand("select-regions", "Threshold and refine a density mask");
  sel_cmd->add_option("--density", sel.density)->required()->check(CLI::ExistingFile);
  sel_cmd->add_option("--out-dir", sel.out_dir)->required();
  sel_cmd->add_option("--threshold", sel.threshold, "Quantile fraction, or tau with --absolute");
  sel_cmd->add_flag("--absolute", sel.absolute, "Treat --threshold as an absolute level");
  sel_cmd->add_option("--rows", sel.rows, "Resize the density to this many rows first");
  sel_cmd->add_option("--cols", sel.cols, "Resize the density to this many columns first");

  DafmArgs dafm;
  ModelArgs dafm_model;
  CLI::App* dafm_cmd = app.add_subcommand("dafm", "Run the dense-area focusing module");
  dafm_cmd->add_option("--features", dafm.features)->required()->check(CLI::ExistingFile);
  dafm_cmd->add_option("--density", dafm.density)->required()->check(CLI::ExistingFile);
  dafm_cmd->add_option("--threshold", dafm.threshold);
  dafm_cmd->add_flag("--absolute", dafm.absolute);
  dafm_cmd->add_option("--proj-dim", dafm.proj_dim, "Attention width (0 = channels)");
  dafm_cmd->add_option("--dump-dir", dafm.dump_dir, "Write the refined mask, focus bank and agent features");
  add_model(dafm_cmd, dafm_model);

  DffmArgs dffm;
  ModelArgs dffm_model;
  CLI::App* dffm_cmd = app.add_subcommand("dffm", "Run the dual filter fusion module");
  dffm_cmd->add_option("--features", dffm.features)->required()->check(CLI::ExistingFile);
  dffm_cmd->add_option("--density", dffm.density)->required()->check(CLI::ExistingFile);
  dffm_cmd->add_option("--kernels", dffm.kernels, "Comma-separated pooling kernels");
  dffm_cmd->add_option("--dump-paths", dffm.dump_dir, "Write each path's output at pooled resolution");
  add_model(dffm_cmd, dffm_model);

  EvalArgs ev;
  CLI::App* eval_cmd = app.add_subcommand("eval", "COCO-style AP report");
  eval_cmd->add_option("--annotations,--gt", ev.annotations)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--detections,--dets", ev.detections)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--csv", ev.csv, "Also write the report as CSV");
  eval_cmd->add_option("--max-dets", ev.max_dets, "Detections kept per image");
  eval_cmd->add_flag("--dtod", ev.dtod, "Keep up to 1500 detections per image");
  eval_cmd->add_option("--class-iou", ev.class_iou, "IoU for the per-category table");

  GradCheckArgs gc;
  CLI::App* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  std::vector<std::string> module_names = GradCheckModules();
  module_names.push_back("all");
  gc_cmd->add_option("--module", gc.module)->required()->check(CLI::IsMember(module_names));
  gc_cmd->add_option("--points", gc.points, "Seeded points, starting at --seed");
  gc_cmd->add_option("--eps", gc.eps, "Central-difference step");

  TrainArgs tr;
  CLI::App* tr_cmd = app.add_subcommand("train-demo", "Fit the density branch on synthetic scenes");
  tr_cmd->add_option("--steps", tr.steps);
  tr_cmd->add_option("--lr", tr.lr);
  tr_cmd->add_option("--out", tr.out, "Loss trace CSV (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (seed_opt->count() > 0) global.seed = seed_value;
  if (image_opt->count() > 0) gtd.image_id = image_id;

  const Context ctx{global, out, err};
  try {
    if (*synth_cmd) RunSynth(synth, ctx);
    if (*gtd_cmd) RunGtDensity(gtd, ctx);
    if (*cal_cmd) RunCalibrate(cal_density, cal_model, ctx);
    if (*sel_cmd) RunSelectRegions(sel, ctx);
    if (*dafm_cmd) RunDafm(dafm, dafm_model, ctx);
    if (*dffm_cmd) RunDffm(dffm, dffm_model, ctx);
    if (*eval_cmd) RunEval(ev, ctx);
    if (*gc_cmd && !RunGradCheck(gc, ctx)) {
      err << "error: gradient check above tolerance\n";
      return kExitNumeric;
    }
    if (*tr_cmd) RunTrainDemo(tr, ctx);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace densefocus
