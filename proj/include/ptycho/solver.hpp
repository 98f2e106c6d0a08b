#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ptycho/denoiser.hpp"
#include "ptycho/forward.hpp"
#include "ptycho/types.hpp"

namespace ptycho {

/// Per-iteration denoiser strengths tau_k with the coupling constant lambda.
/// The quadratic penalty weight of iteration k is mu_k = lambda / tau_k^2, so
/// a decreasing strength schedule drives the penalty to infinity.
struct Schedule {
  std::vector<double> tau;
  double lambda = 0.0;  // lambda_tilde * sigma_hat^2
  double lambda_tilde = 0.0;
  double sigma_hat = 1.0;

  int iterations() const { return static_cast<int>(tau.size()); }
  double mu(int k) const { return tau[k] > 0.0 ? lambda / (tau[k] * tau[k]) : 0.0; }
};

/// Log-spaced strengths from tau_start down to tau_end over `iterations`
/// steps (constant when iterations == 1); lambda = lambda_tilde * sigma_hat^2.
Schedule make_schedule(double tau_start, double tau_end, int iterations, double lambda_tilde,
                       double sigma_hat);

enum class Algorithm { hqs, simpie, seqpie, error_reduction };

Algorithm algorithm_from_string(const std::string& name);
std::string to_string(Algorithm a);

struct InitPolicy {
  enum class Kind { flat, simpie_warmstart };
  Kind kind = Kind::flat;
  int warm_iterations = 100;
};

struct SolverConfig {
  Algorithm algorithm = Algorithm::hqs;
  Schedule schedule;
  DenoiserConfig denoiser;
  InitPolicy init;
  std::optional<ComplexImage> init_image;  // overrides init when set (resume)
  double pie_beta = 1.0;          // step size of the sequential PIE update
  bool use_weighted_prox = true;  // spatially varying prox vs plain denoising
  Index coverage_border = -1;     // when >= 0, require probe coverage of the
                                  // border-cropped region before solving
};

struct SolverState {
  ComplexImage x;
  int iterations = 0;
  double initial_residual = 0.0;            // relative data residual of x_0
  std::vector<double> residual_history;     // entry k-1 belongs to iterate x_k
};

/// Called after each outer iteration with the new iterate.
using IterationObserver =
    std::function<void(int k, double tau, double mu, double c, const ComplexImage& x)>;

/// Flat start: constant amplitude 0.5, phase 0.
ComplexImage flat_init(Index rows, Index cols);

/// Pointwise closed-form minimizer of (y - |z|)^2 + (mu/n) |z - x_hat|^2 in
/// the Fourier domain: amplitude c y + (1-c) |x_hat| with c = n/(n+mu), phase
/// kept from x_hat (zero-amplitude entries keep phase 0).
ComplexImage hqs_data_step(const ComplexImage& x_hat, const RealImage& y, double c);

/// Probe-weighted average: sum_l A_l^* z_l / sum_l |A_l|^2, zero where no
/// probe covers the pixel.  Solves the pixelwise least-squares problem
/// min_x sum_l ||A_l x - z_l||^2 on the covered region.
ComplexImage weighted_average(const std::vector<ComplexImage>& windows, const Probe& probe,
                              const ScanGeometry& geometry);
ComplexImage weighted_average(const std::vector<ComplexImage>& windows, const Probe& probe,
                              const ScanGeometry& geometry, const RealImage& weight_map);

/// Alternating scheme for full-image Fourier amplitude data: closed-form data
/// step in the Fourier domain followed by one denoiser application per
/// iteration.  algorithm == error_reduction forces full modulus replacement
/// and the nonnegativity projection.  Always starts from the flat iterate;
/// PIE warm starts apply to ptychographic data only.
SolverState hqs_phase_retrieval(const RealImage& y, const SolverConfig& config,
                                unsigned threads = 1, const IterationObserver& observer = {});

/// Splitting scheme for ptychography: per probe a closed-form data step on
/// the window spectrum, probe-weighted averaging, then one denoiser step,
/// with the penalty schedule driving the data step toward full modulus
/// replacement.
SolverState hqs_ptychography(const MeasurementSet& measurements, const SolverConfig& config,
                             unsigned threads = 1, const IterationObserver& observer = {});

/// Simultaneous PIE: modulus replacement on every window spectrum followed by
/// probe-weighted averaging.
SolverState sim_pie(const MeasurementSet& measurements, const SolverConfig& config,
                    unsigned threads = 1, const IterationObserver& observer = {});

/// Sequential PIE: per-window modulus replacement applied in position order
/// with additive object updates of step beta, normalized by max |P|^2.
SolverState seq_pie(const MeasurementSet& measurements, const SolverConfig& config,
                    unsigned threads = 1, const IterationObserver& observer = {});

/// Dispatch on config.algorithm.
SolverState run_solver(const MeasurementSet& measurements, const SolverConfig& config,
                       unsigned threads = 1, const IterationObserver& observer = {});

}  // namespace ptycho
