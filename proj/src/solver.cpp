#include "ptycho/solver.hpp"

#include <cmath>
#include <stdexcept>

#include "ptycho/fft.hpp"
#include "ptycho/image.hpp"
#include "ptycho/parallel.hpp"

namespace ptycho {
namespace {

Complex unit_phase(Complex z) {
  const double a = std::abs(z);
  return a > 0.0 ? z / a : Complex(1.0, 0.0);
}

ComplexImage modulus_replace(const ComplexImage& spectrum, const RealImage& y) {
  ComplexImage out(spectrum.rows(), spectrum.cols());
  for (Index i = 0; i < out.size(); ++i)
    out.data()[i] = y.data()[i] * unit_phase(spectrum.data()[i]);
  return out;
}

double measurement_norm_sq(const MeasurementSet& m) {
  double acc = 0.0;
  for (const auto& y : m.amplitudes) acc += y.square().sum();
  return acc;
}

double relative_residual(double residual_sq, double norm_sq) {
  return norm_sq > 0.0 ? std::sqrt(residual_sq / norm_sq) : std::sqrt(residual_sq);
}

/// One full forward pass; returns the relative data residual of x.
double data_residual(const ComplexImage& x, const MeasurementSet& m, double norm_sq,
                     unsigned threads) {
  std::vector<double> parts(m.geometry.count(), 0.0);
  parallel_for(m.geometry.count(), threads, [&](std::size_t ell) {
    const ComplexImage spectrum = fft2(exit_wave(x, m.probe, m.geometry, ell));
    parts[ell] = (m.amplitudes[ell] - spectrum.abs()).square().sum();
  });
  double acc = 0.0;
  for (double p : parts) acc += p;
  return relative_residual(acc, norm_sq);
}

void check_measurements(const MeasurementSet& m) {
  validate_geometry(m.geometry);
  if (m.probe.size() != m.geometry.window_n)
    throw std::invalid_argument("solver: probe/geometry size mismatch");
  if (m.amplitudes.size() != m.geometry.count())
    throw std::invalid_argument("solver: amplitude count mismatch");
  for (const auto& y : m.amplitudes)
    if (y.rows() != m.geometry.window_n || y.cols() != m.geometry.window_n)
      throw std::invalid_argument("solver: amplitude shape mismatch");
}

void check_coverage(const RealImage& weight_map, Index border) {
  if (border < 0) return;
  const RealImage crop = crop_border(weight_map, border);
  if (crop.minCoeff() <= 0.0)
    throw std::invalid_argument(
        "solver: probe coverage has holes inside the metric crop region; "
        "the configuration cannot reconstruct the evaluated area");
}

struct PtychoWorkspace {
  RealImage weight_map;
  BoolImage covered;
  RealImage weight_sqrt;  // zero-coverage pixels substituted with 1
  double norm_sq = 0.0;
};

PtychoWorkspace make_workspace(const MeasurementSet& m) {
  PtychoWorkspace ws;
  ws.weight_map = intensity_weight_map(m.probe, m.geometry);
  ws.covered = ws.weight_map > 0.0;
  ws.weight_sqrt = ws.covered.select(ws.weight_map.sqrt(), RealImage::Ones(ws.weight_map.rows(), ws.weight_map.cols()));
  ws.norm_sq = measurement_norm_sq(m);
  return ws;
}

void zero_uncovered(ComplexImage& x, const BoolImage& covered) {
  for (Index i = 0; i < x.size(); ++i)
    if (!covered.data()[i]) x.data()[i] = Complex(0.0, 0.0);
}

ComplexImage initial_iterate(const MeasurementSet& m, const SolverConfig& config,
                             unsigned threads);

}  // namespace

Schedule make_schedule(double tau_start, double tau_end, int iterations, double lambda_tilde,
                       double sigma_hat) {
  if (!(tau_start >= tau_end) || !(tau_end > 0.0))
    throw std::invalid_argument("make_schedule: need tau_start >= tau_end > 0");
  if (iterations < 1) throw std::invalid_argument("make_schedule: need at least one iteration");
  if (lambda_tilde < 0.0) throw std::invalid_argument("make_schedule: negative lambda_tilde");
  if (!(sigma_hat > 0.0)) throw std::invalid_argument("make_schedule: sigma_hat must be positive");

  Schedule s;
  s.lambda_tilde = lambda_tilde;
  s.sigma_hat = sigma_hat;
  s.lambda = lambda_tilde * sigma_hat * sigma_hat;
  s.tau.resize(static_cast<std::size_t>(iterations), tau_start);
  if (iterations > 1) {
    const double ratio = tau_end / tau_start;
    for (int k = 0; k < iterations; ++k)
      s.tau[static_cast<std::size_t>(k)] =
          tau_start * std::pow(ratio, static_cast<double>(k) / static_cast<double>(iterations - 1));
  }
  return s;
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "hqs") return Algorithm::hqs;
  if (name == "simpie") return Algorithm::simpie;
  if (name == "seqpie") return Algorithm::seqpie;
  if (name == "error_reduction") return Algorithm::error_reduction;
  throw std::invalid_argument("unknown algorithm: " + name);
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::hqs: return "hqs";
    case Algorithm::simpie: return "simpie";
    case Algorithm::seqpie: return "seqpie";
    case Algorithm::error_reduction: return "error_reduction";
  }
  return "unknown";
}

ComplexImage flat_init(Index rows, Index cols) {
  return ComplexImage::Constant(rows, cols, Complex(0.5, 0.0));
}

ComplexImage hqs_data_step(const ComplexImage& x_hat, const RealImage& y, double c) {
  if (x_hat.rows() != y.rows() || x_hat.cols() != y.cols())
    throw std::invalid_argument("hqs_data_step: shape mismatch");
  if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("hqs_data_step: c outside [0, 1]");
  ComplexImage out(x_hat.rows(), x_hat.cols());
  for (Index i = 0; i < out.size(); ++i) {
    const Complex z = x_hat.data()[i];
    const double amplitude = c * y.data()[i] + (1.0 - c) * std::abs(z);
    out.data()[i] = amplitude * unit_phase(z);
  }
  return out;
}

ComplexImage weighted_average(const std::vector<ComplexImage>& windows, const Probe& probe,
                              const ScanGeometry& geometry) {
  return weighted_average(windows, probe, geometry, intensity_weight_map(probe, geometry));
}

ComplexImage weighted_average(const std::vector<ComplexImage>& windows, const Probe& probe,
                              const ScanGeometry& geometry, const RealImage& weight_map) {
  validate_geometry(geometry);
  if (windows.size() != geometry.count())
    throw std::invalid_argument("weighted_average: window count mismatch");

  ComplexImage acc = ComplexImage::Zero(geometry.image_h, geometry.image_w);
  const ComplexImage probe_conj = probe.values.conjugate();
  for (std::size_t ell = 0; ell < windows.size(); ++ell) {
    if (windows[ell].rows() != geometry.window_n || windows[ell].cols() != geometry.window_n)
      throw std::invalid_argument("weighted_average: window shape mismatch");
    const auto& p = geometry.positions[ell];
    acc.block(p[0], p[1], geometry.window_n, geometry.window_n) += probe_conj * windows[ell];
  }
  ComplexImage out(acc.rows(), acc.cols());
  for (Index i = 0; i < out.size(); ++i) {
    const double w = weight_map.data()[i];
    out.data()[i] = w > 0.0 ? acc.data()[i] / w : Complex(0.0, 0.0);
  }
  return out;
}

namespace {

ComplexImage initial_iterate(const MeasurementSet& m, const SolverConfig& config,
                             unsigned threads) {
  if (config.init_image) {
    if (config.init_image->rows() != m.geometry.image_h ||
        config.init_image->cols() != m.geometry.image_w)
      throw std::invalid_argument("solver: init_image shape mismatch");
    return *config.init_image;
  }
  if (config.init.kind == InitPolicy::Kind::simpie_warmstart && config.init.warm_iterations > 0) {
    SolverConfig warm;
    warm.algorithm = Algorithm::simpie;
    warm.schedule.tau.assign(static_cast<std::size_t>(config.init.warm_iterations), 1.0);
    warm.init.kind = InitPolicy::Kind::flat;
    return sim_pie(m, warm, threads).x;
  }
  return flat_init(m.geometry.image_h, m.geometry.image_w);
}

}  // namespace

SolverState hqs_phase_retrieval(const RealImage& y, const SolverConfig& config, unsigned threads,
                                const IterationObserver& observer) {
  (void)threads;  // single full-image transform per iteration
  if (y.size() == 0) throw std::invalid_argument("hqs_phase_retrieval: empty data");
  const bool error_reduction = config.algorithm == Algorithm::error_reduction;
  DenoiserConfig denoiser_config;
  if (error_reduction)
    denoiser_config.kind = DenoiserKind::nonneg_projection;
  else
    denoiser_config = config.denoiser;
  const Denoiser denoiser(denoiser_config);

  const double n = static_cast<double>(y.size());
  const double norm_sq = y.square().sum();
  const int iterations = config.schedule.iterations();

  SolverState state;
  state.x = flat_init(y.rows(), y.cols());
  state.residual_history.reserve(static_cast<std::size_t>(iterations));

  for (int k = 1; k <= iterations; ++k) {
    const double tau = config.schedule.tau[static_cast<std::size_t>(k - 1)];
    const double mu = error_reduction ? 0.0 : config.schedule.mu(k - 1);
    const double c = n / (n + mu);

    const ComplexImage spectrum = fft2(state.x);
    const double r = relative_residual((y - spectrum.abs()).square().sum(), norm_sq);
    if (k == 1)
      state.initial_residual = r;
    else
      state.residual_history.push_back(r);

    const ComplexImage z = ifft2(hqs_data_step(spectrum, y, c));
    state.x = denoiser.denoise(z, tau);
    state.iterations = k;
    if (observer) observer(k, tau, mu, c, state.x);
  }

  const double r_final = relative_residual((y - fft2(state.x).abs()).square().sum(), norm_sq);
  if (iterations > 0)
    state.residual_history.push_back(r_final);
  else
    state.initial_residual = r_final;
  return state;
}

SolverState hqs_ptychography(const MeasurementSet& m, const SolverConfig& config, unsigned threads,
                             const IterationObserver& observer) {
  check_measurements(m);
  const bool error_reduction = config.algorithm == Algorithm::error_reduction;
  DenoiserConfig denoiser_config;
  if (error_reduction)
    denoiser_config.kind = DenoiserKind::nonneg_projection;
  else
    denoiser_config = config.denoiser;
  const Denoiser denoiser(denoiser_config);
  const PtychoWorkspace ws = make_workspace(m);
  check_coverage(ws.weight_map, config.coverage_border);

  const ScanGeometry& g = m.geometry;
  const double n = static_cast<double>(g.window_n) * static_cast<double>(g.window_n);
  const int iterations = config.schedule.iterations();
  const bool weighted = config.use_weighted_prox && denoiser.supports_weighted();

  SolverState state;
  state.x = initial_iterate(m, config, threads);
  state.residual_history.reserve(static_cast<std::size_t>(iterations));

  std::vector<ComplexImage> corrected(g.count());
  std::vector<double> resid_parts(g.count(), 0.0);

  for (int k = 1; k <= iterations; ++k) {
    const double tau = config.schedule.tau[static_cast<std::size_t>(k - 1)];
    const double mu = error_reduction ? 0.0 : config.schedule.mu(k - 1);
    const double c = n / (n + mu);

    parallel_for(g.count(), threads, [&](std::size_t ell) {
      const ComplexImage spectrum = fft2(exit_wave(state.x, m.probe, g, ell));
      resid_parts[ell] = (m.amplitudes[ell] - spectrum.abs()).square().sum();
      corrected[ell] = ifft2(hqs_data_step(spectrum, m.amplitudes[ell], c));
    });
    double resid_sq = 0.0;
    for (double p : resid_parts) resid_sq += p;
    const double r = relative_residual(resid_sq, ws.norm_sq);
    if (k == 1)
      state.initial_residual = r;
    else
      state.residual_history.push_back(r);

    const ComplexImage averaged = weighted_average(corrected, m.probe, g, ws.weight_map);
    state.x = weighted ? denoiser.denoise_weighted(averaged, tau, ws.weight_sqrt)
                       : denoiser.denoise(averaged, tau);
    zero_uncovered(state.x, ws.covered);
    state.iterations = k;
    if (observer) observer(k, tau, mu, c, state.x);
  }

  const double r_final = data_residual(state.x, m, ws.norm_sq, threads);
  if (iterations > 0)
    state.residual_history.push_back(r_final);
  else
    state.initial_residual = r_final;
  return state;
}

SolverState sim_pie(const MeasurementSet& m, const SolverConfig& config, unsigned threads,
                    const IterationObserver& observer) {
  check_measurements(m);
  const PtychoWorkspace ws = make_workspace(m);
  check_coverage(ws.weight_map, config.coverage_border);

  const ScanGeometry& g = m.geometry;
  const int iterations = config.schedule.iterations();

  SolverState state;
  state.x = config.init_image ? *config.init_image : flat_init(g.image_h, g.image_w);
  state.residual_history.reserve(static_cast<std::size_t>(iterations));

  std::vector<ComplexImage> corrected(g.count());
  std::vector<double> resid_parts(g.count(), 0.0);

  for (int k = 1; k <= iterations; ++k) {
    parallel_for(g.count(), threads, [&](std::size_t ell) {
      const ComplexImage spectrum = fft2(exit_wave(state.x, m.probe, g, ell));
      resid_parts[ell] = (m.amplitudes[ell] - spectrum.abs()).square().sum();
      corrected[ell] = ifft2(modulus_replace(spectrum, m.amplitudes[ell]));
    });
    double resid_sq = 0.0;
    for (double p : resid_parts) resid_sq += p;
    const double r = relative_residual(resid_sq, ws.norm_sq);
    if (k == 1)
      state.initial_residual = r;
    else
      state.residual_history.push_back(r);

    state.x = weighted_average(corrected, m.probe, g, ws.weight_map);
    state.iterations = k;
    if (observer) observer(k, 0.0, 0.0, 1.0, state.x);
  }

  const double r_final = data_residual(state.x, m, ws.norm_sq, threads);
  if (iterations > 0)
    state.residual_history.push_back(r_final);
  else
    state.initial_residual = r_final;
  return state;
}

SolverState seq_pie(const MeasurementSet& m, const SolverConfig& config, unsigned threads,
                    const IterationObserver& observer) {
  check_measurements(m);
  if (!(config.pie_beta > 0.0 && config.pie_beta <= 2.0) && config.pie_beta != 0.0)
    throw std::invalid_argument("seq_pie: beta outside (0, 2]");
  const PtychoWorkspace ws = make_workspace(m);
  check_coverage(ws.weight_map, config.coverage_border);

  const ScanGeometry& g = m.geometry;
  const double max_p2 = m.probe.intensity().maxCoeff();
  if (max_p2 <= 0.0) throw std::invalid_argument("seq_pie: probe has empty support");
  const ComplexImage probe_conj = m.probe.values.conjugate();
  const int iterations = config.schedule.iterations();

  SolverState state;
  state.x = config.init_image ? *config.init_image : flat_init(g.image_h, g.image_w);
  state.residual_history.reserve(static_cast<std::size_t>(iterations));
  state.initial_residual = data_residual(state.x, m, ws.norm_sq, threads);

  for (int k = 1; k <= iterations; ++k) {
    for (std::size_t ell = 0; ell < g.count(); ++ell) {
      const ComplexImage psi = exit_wave(state.x, m.probe, g, ell);
      const ComplexImage spectrum = fft2(psi);
      const ComplexImage psi_corr = ifft2(modulus_replace(spectrum, m.amplitudes[ell]));
      const auto& p = g.positions[ell];
      state.x.block(p[0], p[1], g.window_n, g.window_n) +=
          (config.pie_beta / max_p2) * (probe_conj * (psi_corr - psi));
    }
    state.residual_history.push_back(data_residual(state.x, m, ws.norm_sq, threads));
    state.iterations = k;
    if (observer) observer(k, 0.0, 0.0, 1.0, state.x);
  }
  return state;
}

SolverState run_solver(const MeasurementSet& m, const SolverConfig& config, unsigned threads,
                       const IterationObserver& observer) {
  switch (config.algorithm) {
    case Algorithm::hqs:
    case Algorithm::error_reduction:
      return hqs_ptychography(m, config, threads, observer);
    case Algorithm::simpie:
      return sim_pie(m, config, threads, observer);
    case Algorithm::seqpie:
      return seq_pie(m, config, threads, observer);
  }
  throw std::logic_error("invalid algorithm");
}

}  // namespace ptycho
