// Command-line front end: simulate measurements, reconstruct, evaluate,
// run full experiment sweeps, and inspect probe/scan configurations.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "ptycho/dataset.hpp"
#include "ptycho/experiment.hpp"
#include "ptycho/image_io.hpp"
#include "ptycho/measurement_io.hpp"
#include "ptycho/parallel.hpp"
#include "ptycho/png_io.hpp"
#include "ptycho/solver.hpp"

namespace fs = std::filesystem;
using namespace ptycho;

namespace {

struct SimulateArgs {
  std::string rgb_path;
  std::string object_path;
  Index crop = 256;
  Index window = 84;
  double radius = 40.0;
  Index rows = 7;
  Index cols = 7;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  std::string out_dir = "sim";
  unsigned threads = 0;
};

int run_simulate(const SimulateArgs& args) {
  fs::create_directories(args.out_dir);

  ComplexImage object;
  double theta0 = 0.0;
  bool from_rgb = false;
  if (!args.rgb_path.empty()) {
    const RgbImage rgb = crop_center(load_png_rgb(args.rgb_path), args.crop);
    object = rgb_to_complex(rgb, args.seed, &theta0);
    from_rgb = true;
  } else if (!args.object_path.empty()) {
    object = load_cimg(args.object_path);
  } else {
    std::cerr << "simulate: need --rgb or --object\n";
    return 1;
  }

  const Probe probe = make_circular_probe(args.window, args.radius);
  const ScanGeometry geometry =
      make_scan_grid(object.rows(), object.cols(), args.rows, args.cols, args.window);

  MeasurementSet measurements = forward(object, probe, geometry, args.threads);
  if (args.alpha > 0.0)
    measurements = add_shot_noise(measurements, args.alpha, args.seed, args.threads);

  const fs::path out(args.out_dir);
  save_measurements(out / "measurements.pmeas", measurements);
  save_cimg(out / "probe.cimg", probe.values);
  save_cimg(out / "object_gt.cimg", object);
  std::ofstream manifest(out / "simulate.json");
  manifest << "{\n  \"seed\": " << args.seed << ",\n  \"alpha\": " << args.alpha;
  if (from_rgb) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", theta0);
    manifest << ",\n  \"global_phase\": " << buf;
  }
  manifest << "\n}\n";

  std::cout << "wrote " << geometry.count() << " probe positions to "
            << (out / "measurements.pmeas").string() << "\n";
  return 0;
}

struct ReconstructArgs {
  std::string measurements_path;
  std::string probe_path;
  std::string solver_path;
  std::string out_dir = "reco";
  Index border = -1;
  unsigned threads = 0;
  int save_every = 0;  // emit intermediate iterates every k iterations
};

int run_reconstruct(const ReconstructArgs& args) {
  fs::create_directories(args.out_dir);
  const ComplexImage probe_values = load_cimg(args.probe_path);
  const Probe probe{probe_values};
  const MeasurementSet measurements = load_measurements(args.measurements_path, probe);

  const SolverSpec spec = load_solver_spec(args.solver_path);
  SolverConfig config = to_solver_config(spec, measurements.alpha, args.border);

  IterationObserver observer;
  const fs::path out(args.out_dir);
  if (args.save_every > 0) {
    observer = [&](int k, double, double, double, const ComplexImage& x) {
      if (k % args.save_every == 0) {
        char name[64];
        std::snprintf(name, sizeof(name), "iter_%06d.cimg", k);
        save_cimg(out / name, x);
      }
    };
  }

  const SolverState state = run_solver(measurements, config, args.threads, observer);

  save_cimg(out / "reco.cimg", state.x);
  const auto [amp, phase] = decompose(state.x);
  save_png_gray(out / "reco_amp.png", amp);
  save_png_gray(out / "reco_phase.png", phase_to_unit(phase));
  const double n = static_cast<double>(measurements.geometry.window_n) *
                   static_cast<double>(measurements.geometry.window_n);
  std::ofstream res(out / "residuals.csv");
  res << residual_csv(state, config, n);

  std::printf("%s: %d iterations, relative residual %.6g -> %.6g\n", spec.name.c_str(),
              state.iterations, state.initial_residual,
              state.residual_history.empty() ? state.initial_residual
                                             : state.residual_history.back());
  return 0;
}

struct EvaluateArgs {
  std::string reco_path;
  std::string gt_path;
  Index border = 20;
  std::string csv_path;
};

int run_evaluate(const EvaluateArgs& args) {
  const ComplexImage reco = load_cimg(args.reco_path);
  const ComplexImage gt = load_cimg(args.gt_path);
  const MetricReport report = compute_metrics(reco, gt, args.border);

  std::printf("psnr_amplitude_db,%.6f%s\n", report.psnr_amplitude,
              report.amplitude_saturated ? ",saturated" : "");
  std::printf("psnr_phase_db,%.6f%s\n", report.psnr_phase,
              report.phase_saturated ? ",saturated" : "");
  std::printf("border_excluded,%lld\n", static_cast<long long>(report.border_excluded));

  if (!args.csv_path.empty()) {
    std::ofstream csv(args.csv_path);
    csv << "psnr_amplitude,psnr_phase,amplitude_saturated,phase_saturated,border_excluded\n";
    char line[160];
    std::snprintf(line, sizeof(line), "%.6f,%.6f,%d,%d,%lld\n", report.psnr_amplitude,
                  report.psnr_phase, report.amplitude_saturated ? 1 : 0,
                  report.phase_saturated ? 1 : 0, static_cast<long long>(report.border_excluded));
    csv << line;
  }
  return 0;
}

struct ProbeArgs {
  Index window = 84;
  double radius = 40.0;
  Index rows = 7;
  Index cols = 7;
  Index image_size = 256;
  Index border = 20;
  std::string weight_png;
};

int run_probe(const ProbeArgs& args) {
  const Probe probe = make_circular_probe(args.window, args.radius);
  const ScanGeometry geometry =
      make_scan_grid(args.image_size, args.image_size, args.rows, args.cols, args.window);
  const RealImage weights = intensity_weight_map(probe, geometry);

  std::printf("window,%lld\n", static_cast<long long>(args.window));
  std::printf("radius,%.6g\n", args.radius);
  std::printf("positions,%zu\n", geometry.count());
  std::printf("support_area_px,%lld\n", static_cast<long long>(probe.support_area()));
  if (args.cols >= 2)
    std::printf("overlap_fraction,%.6f\n", overlap_fraction(probe, geometry));
  std::printf("weight_min,%.6g\n", weights.minCoeff());
  std::printf("weight_max,%.6g\n", weights.maxCoeff());
  if (2 * args.border < args.image_size) {
    const RealImage cropped = crop_border(weights, args.border);
    std::printf("weight_min_cropped_b%lld,%.6g\n", static_cast<long long>(args.border),
                cropped.minCoeff());
  }
  if (!args.weight_png.empty()) {
    const double peak = weights.maxCoeff();
    save_png_gray(args.weight_png, peak > 0 ? RealImage(weights / peak) : weights);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ptychography and Fourier phase retrieval reconstruction toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate far-field amplitude measurements");
  simulate->add_option("--rgb", sim.rgb_path, "RGB PNG turned into a complex object");
  simulate->add_option("--object", sim.object_path, "Existing complex object (CIMG1)");
  simulate->add_option("--crop", sim.crop, "Central crop applied to --rgb input");
  simulate->add_option("--window", sim.window, "Probe window size N");
  simulate->add_option("--radius", sim.radius, "Probe disc radius in pixels");
  simulate->add_option("--rows", sim.rows, "Scan grid rows");
  simulate->add_option("--cols", sim.cols, "Scan grid columns");
  simulate->add_option("--alpha", sim.alpha, "Shot noise level (0 = noiseless)");
  simulate->add_option("--seed", sim.seed, "RNG seed");
  simulate->add_option("--out", sim.out_dir, "Output directory");
  simulate->add_option("--threads", sim.threads, "Worker threads (0 = all cores)");

  ReconstructArgs rec;
  auto* reconstruct = app.add_subcommand("reconstruct", "Reconstruct an object from measurements");
  reconstruct->add_option("--measurements", rec.measurements_path, "PMEAS1 file")->required();
  reconstruct->add_option("--probe", rec.probe_path, "Probe CIMG1 file")->required();
  reconstruct->add_option("--solver", rec.solver_path, "Solver config (JSON)")->required();
  reconstruct->add_option("--out", rec.out_dir, "Output directory");
  reconstruct->add_option("--border", rec.border,
                          "Require probe coverage inside this border crop (-1 = skip)");
  reconstruct->add_option("--threads", rec.threads, "Worker threads (0 = all cores)");
  reconstruct->add_option("--save-every", rec.save_every,
                          "Write intermediate iterates every k iterations (0 = off)");

  EvaluateArgs eval;
  auto* evaluate = app.add_subcommand("evaluate", "Compare a reconstruction against ground truth");
  evaluate->add_option("--reco", eval.reco_path, "Reconstruction (CIMG1)")->required();
  evaluate->add_option("--gt", eval.gt_path, "Ground truth (CIMG1)")->required();
  evaluate->add_option("--border", eval.border, "Border exclusion in pixels");
  evaluate->add_option("--csv", eval.csv_path, "Optional CSV output path");

  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> out_override;
  std::optional<unsigned> threads_override;
  auto* experiment = app.add_subcommand("experiment", "Run a full sweep from a config file");
  experiment->add_option("--config", config_path, "Experiment config (JSON)")->required();
  experiment->add_option("--seed", seed_override, "Override the config seed");
  experiment->add_option("--out", out_override, "Override the output directory");
  experiment->add_option("--threads", threads_override, "Override worker threads (0 = all cores)");

  ProbeArgs probe_args;
  auto* probe = app.add_subcommand("probe", "Print probe/scan diagnostics");
  probe->add_option("--window", probe_args.window, "Probe window size N");
  probe->add_option("--radius", probe_args.radius, "Probe disc radius in pixels");
  probe->add_option("--rows", probe_args.rows, "Scan grid rows");
  probe->add_option("--cols", probe_args.cols, "Scan grid columns");
  probe->add_option("--image-size", probe_args.image_size, "Square image size");
  probe->add_option("--border", probe_args.border, "Crop used for the coverage minimum");
  probe->add_option("--weight-png", probe_args.weight_png, "Write normalized weight map PNG");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return run_simulate(sim);
    if (*reconstruct) return run_reconstruct(rec);
    if (*evaluate) return run_evaluate(eval);
    if (*experiment) {
      ExperimentConfig config = load_experiment_config(config_path);
      if (seed_override) config.seed = *seed_override;
      if (out_override) config.out_dir = *out_override;
      if (threads_override) config.threads = *threads_override;
      const auto rows = run_experiment(config);
      std::cout << summary_table(summarize(rows));
      for (const auto& row : rows)
        if (!row.error.empty())
          std::cerr << "tuple failed: " << row.image << "/" << row.solver << ": " << row.error
                    << "\n";
      return 0;
    }
    if (*probe) return run_probe(probe_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
