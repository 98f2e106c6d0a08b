#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ptycho/image.hpp"
#include "ptycho/solver.hpp"

namespace ptycho {

struct ProbeSpec {
  Index window = 84;
  double radius = 40.0;
};

struct GridSpec {
  Index rows = 7;
  Index cols = 7;
};

/// Schedule parameters as configured; sigma_hat defaults to the tuple's noise
/// level (or 1 for noiseless data) when unset.
struct ScheduleParams {
  double tau_start = 30.0;
  double tau_end = 6.0;
  int iterations = 600;
  double lambda_tilde = 1e-4;
  std::optional<double> sigma_hat;
};

struct SolverSpec {
  std::string name;
  Algorithm algorithm = Algorithm::hqs;
  ScheduleParams schedule;
  DenoiserConfig denoiser;
  InitPolicy init{InitPolicy::Kind::simpie_warmstart, 100};
  double beta = 1.0;
  bool use_weighted_prox = true;
};

/// Materializes a SolverConfig for one noise level (resolves sigma_hat and
/// builds the concrete schedule).
SolverConfig to_solver_config(const SolverSpec& spec, double alpha, Index coverage_border);

struct ExperimentConfig {
  std::vector<std::string> images;
  Index crop = 256;
  ProbeSpec probe;
  std::vector<GridSpec> grids;
  std::vector<double> alphas;
  std::uint64_t seed = 0;
  std::vector<SolverSpec> solvers;
  Index border = 20;
  std::string out_dir = "out";
  unsigned threads = 0;  // 0 = all hardware threads
  bool save_residuals = false;
  bool save_measurements = false;
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path);
SolverSpec load_solver_spec(const std::filesystem::path& path);
void validate_config(const ExperimentConfig& config);

struct ResultRow {
  std::string image;
  std::string solver;
  GridSpec grid;
  double alpha = 0.0;
  MetricReport metrics;
  int iterations = 0;
  double wall_time = 0.0;
  std::string error;  // empty on success
};

struct SummaryRow {
  std::string solver;
  GridSpec grid;
  double alpha = 0.0;
  int images = 0;
  double mean_psnr_amplitude = 0.0;
  double std_psnr_amplitude = 0.0;
  double mean_psnr_phase = 0.0;
  double std_psnr_phase = 0.0;
  bool best_amplitude = false;  // best mean within the (grid, alpha) group
  bool best_phase = false;
};

/// Measurement seed for one (image, grid, alpha) cell; solvers deliberately
/// do not enter the hash, so adding one never changes another's data.
std::uint64_t tuple_seed(std::uint64_t seed, const std::string& image_id, GridSpec grid,
                         double alpha);

/// Object-preparation seed for one image (fixes the random global phase).
std::uint64_t object_seed(std::uint64_t seed, const std::string& image_id);

/// Full sweep: simulate, reconstruct, evaluate and export for every
/// (image, grid, alpha, solver) tuple.  Per-tuple failures are recorded in
/// the row's error column and the run continues.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config);

/// Population mean/std per (solver, grid, alpha) group with best-per-group
/// markers, ordered deterministically.
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);

std::string results_csv(const std::vector<ResultRow>& rows);
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string summary_table(const std::vector<SummaryRow>& rows);

/// Per-iteration log (k, tau_k, mu_k, c_k, relative_residual) of a finished
/// run; window_pixels is the per-window pixel count entering c_k.
std::string residual_csv(const SolverState& state, const SolverConfig& config,
                         double window_pixels);

}  // namespace ptycho
