#include "ptycho/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "ptycho/dataset.hpp"
#include "ptycho/image_io.hpp"
#include "ptycho/measurement_io.hpp"
#include "ptycho/parallel.hpp"
#include "ptycho/png_io.hpp"
#include "ptycho/rng.hpp"

namespace ptycho {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_double(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

std::string alpha_key(double alpha) { return format_double("%.17g", alpha); }

InitPolicy parse_init(const json& j) {
  InitPolicy init;
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "flat") {
      init.kind = InitPolicy::Kind::flat;
    } else {
      throw std::invalid_argument("solver config: unknown init '" + s + "'");
    }
  } else if (j.is_object() && j.contains("simpie_warmstart")) {
    init.kind = InitPolicy::Kind::simpie_warmstart;
    init.warm_iterations = j.at("simpie_warmstart").get<int>();
    if (init.warm_iterations < 0)
      throw std::invalid_argument("solver config: negative warm-start iterations");
  } else {
    throw std::invalid_argument("solver config: malformed init");
  }
  return init;
}

DenoiserConfig parse_denoiser(const json& j) {
  DenoiserConfig d;
  d.kind = denoiser_kind_from_string(j.value("kind", std::string("identity")));
  if (j.contains("strength_scale")) d.tv_strength_scale = j.at("strength_scale").get<double>();
  if (j.contains("max_iter")) d.tv_max_iter = j.at("max_iter").get<int>();
  if (j.contains("tol")) d.tv_tol = j.at("tol").get<double>();
  if (j.contains("command")) d.external_command = j.at("command").get<std::vector<std::string>>();
  if (j.contains("timeout")) d.external_timeout = j.at("timeout").get<double>();
  if (d.kind == DenoiserKind::external && d.external_command.empty())
    throw std::invalid_argument("solver config: external denoiser needs a command");
  return d;
}

SolverSpec parse_solver(const json& j) {
  SolverSpec spec;
  spec.algorithm = algorithm_from_string(j.value("algorithm", std::string("hqs")));
  spec.name = j.value("name", to_string(spec.algorithm));

  if (j.contains("schedule")) {
    const json& s = j.at("schedule");
    spec.schedule.tau_start = s.value("tau_start", spec.schedule.tau_start);
    spec.schedule.tau_end = s.value("tau_end", spec.schedule.tau_end);
    spec.schedule.iterations = s.value("iterations", spec.schedule.iterations);
    spec.schedule.lambda_tilde = s.value("lambda_tilde", spec.schedule.lambda_tilde);
    if (s.contains("sigma_hat")) spec.schedule.sigma_hat = s.at("sigma_hat").get<double>();
  }
  if (j.contains("iterations")) spec.schedule.iterations = j.at("iterations").get<int>();
  if (spec.schedule.iterations < 1)
    throw std::invalid_argument("solver config: need at least one iteration");

  if (j.contains("denoiser")) spec.denoiser = parse_denoiser(j.at("denoiser"));
  if (j.contains("init")) {
    spec.init = parse_init(j.at("init"));
  } else if (spec.algorithm != Algorithm::hqs) {
    spec.init.kind = InitPolicy::Kind::flat;
  }
  spec.beta = j.value("beta", spec.beta);
  spec.use_weighted_prox = j.value("weighted_prox", spec.use_weighted_prox);
  return spec;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  json j;
  in >> j;
  return j;
}

std::string image_id_from_path(const std::string& path) { return fs::path(path).stem().string(); }

struct Cell {
  std::size_t image = 0;
  std::size_t grid = 0;
  std::size_t alpha = 0;
};

struct Tuple {
  Cell cell;
  std::size_t solver = 0;
};

bool row_key_less(const ResultRow& a, const ResultRow& b) {
  const auto key = [](const ResultRow& r) {
    return std::make_tuple(r.image, r.grid.rows, r.grid.cols, r.alpha, r.solver);
  };
  return key(a) < key(b);
}

}  // namespace

SolverConfig to_solver_config(const SolverSpec& spec, double alpha, Index coverage_border) {
  SolverConfig config;
  config.algorithm = spec.algorithm;
  config.denoiser = spec.denoiser;
  config.init = spec.init;
  config.pie_beta = spec.beta;
  config.use_weighted_prox = spec.use_weighted_prox;
  config.coverage_border = coverage_border;
  if (spec.algorithm == Algorithm::hqs) {
    const double sigma_hat = spec.schedule.sigma_hat.value_or(alpha > 0.0 ? alpha : 1.0);
    config.schedule = make_schedule(spec.schedule.tau_start, spec.schedule.tau_end,
                                    spec.schedule.iterations, spec.schedule.lambda_tilde, sigma_hat);
  } else {
    // PIE-family solvers only consume the iteration count.
    config.schedule.tau.assign(static_cast<std::size_t>(spec.schedule.iterations), 1.0);
    config.schedule.lambda = 0.0;
  }
  return config;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  const json j = read_json(path);
  ExperimentConfig config;
  config.images = j.at("images").get<std::vector<std::string>>();
  config.crop = j.value("crop", config.crop);
  if (j.contains("probe")) {
    config.probe.window = j.at("probe").value("window", config.probe.window);
    config.probe.radius = j.at("probe").value("radius", config.probe.radius);
  }
  if (j.contains("grids")) {
    config.grids.clear();
    for (const auto& g : j.at("grids")) {
      if (!g.is_array() || g.size() != 2)
        throw std::invalid_argument("experiment config: grids entries must be [rows, cols]");
      config.grids.push_back({g[0].get<Index>(), g[1].get<Index>()});
    }
  }
  if (j.contains("alphas")) config.alphas = j.at("alphas").get<std::vector<double>>();
  config.seed = j.value("seed", config.seed);
  config.border = j.value("border", config.border);
  config.out_dir = j.value("out_dir", config.out_dir);
  config.threads = j.value("threads", config.threads);
  config.save_residuals = j.value("save_residuals", config.save_residuals);
  config.save_measurements = j.value("save_measurements", config.save_measurements);
  for (const auto& s : j.at("solvers")) config.solvers.push_back(parse_solver(s));
  validate_config(config);
  return config;
}

SolverSpec load_solver_spec(const fs::path& path) { return parse_solver(read_json(path)); }

void validate_config(const ExperimentConfig& config) {
  if (config.images.empty()) throw std::invalid_argument("experiment config: no input images");
  if (config.grids.empty()) throw std::invalid_argument("experiment config: no grids");
  if (config.alphas.empty()) throw std::invalid_argument("experiment config: no noise levels");
  if (config.solvers.empty()) throw std::invalid_argument("experiment config: no solvers");
  if (config.probe.window < 1 || config.probe.window > config.crop)
    throw std::invalid_argument("experiment config: probe window exceeds crop");
  if (config.border < 0 || 2 * config.border >= config.crop)
    throw std::invalid_argument("experiment config: border too large");
  for (double a : config.alphas)
    if (a < 0) throw std::invalid_argument("experiment config: negative noise level");
  std::vector<std::string> names;
  for (const auto& s : config.solvers) names.push_back(s.name);
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end())
    throw std::invalid_argument("experiment config: duplicate solver names");
}

std::uint64_t object_seed(std::uint64_t seed, const std::string& image_id) {
  return mix64(seed ^ fnv1a64("object:" + image_id));
}

std::uint64_t tuple_seed(std::uint64_t seed, const std::string& image_id, GridSpec grid,
                         double alpha) {
  const std::string key = "measure:" + image_id + ";grid=" + std::to_string(grid.rows) + "x" +
                          std::to_string(grid.cols) + ";alpha=" + alpha_key(alpha);
  return mix64(seed ^ fnv1a64(key));
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  const unsigned threads = config.threads == 0 ? hardware_threads() : config.threads;
  const fs::path out_dir(config.out_dir);
  fs::create_directories(out_dir);

  const Probe probe = make_circular_probe(config.probe.window, config.probe.radius);

  // Objects are prepared once per image; the random global phase is fixed per
  // image, independent of grid and noise level.
  struct PreparedImage {
    std::string id;
    ComplexImage object;
    double theta0 = 0.0;
    std::string error;  // set when preparation failed; tuples inherit it
  };
  std::vector<PreparedImage> prepared(config.images.size());
  for (std::size_t i = 0; i < config.images.size(); ++i) {
    const std::string& path = config.images[i];
    PreparedImage p;
    p.id = image_id_from_path(path);
    try {
      const RgbImage rgb = crop_center(load_png_rgb(path), config.crop);
      p.object = rgb_to_complex(rgb, object_seed(config.seed, p.id), &p.theta0);
      const auto [amp, phase] = decompose(p.object);
      save_cimg(out_dir / (p.id + "_gt.cimg"), p.object);
      save_png_gray(out_dir / (p.id + "_gt_amp.png"), amp);
      save_png_gray(out_dir / (p.id + "_gt_phase.png"), phase_to_unit(phase));
    } catch (const std::exception& e) {
      p.error = e.what();
    }
    prepared[i] = std::move(p);
  }

  std::vector<ScanGeometry> geometries(config.grids.size());
  for (std::size_t g = 0; g < config.grids.size(); ++g)
    geometries[g] = make_scan_grid(config.crop, config.crop, config.grids[g].rows,
                                   config.grids[g].cols, config.probe.window);

  // Measurements per (image, grid, alpha) cell, shared by all solvers.
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < prepared.size(); ++i)
    for (std::size_t g = 0; g < geometries.size(); ++g)
      for (std::size_t a = 0; a < config.alphas.size(); ++a) cells.push_back({i, g, a});

  std::vector<MeasurementSet> cell_measurements(cells.size());
  parallel_for(cells.size(), threads, [&](std::size_t c) {
    const Cell& cell = cells[c];
    if (!prepared[cell.image].error.empty()) return;
    const double alpha = config.alphas[cell.alpha];
    MeasurementSet clean = forward(prepared[cell.image].object, probe, geometries[cell.grid]);
    cell_measurements[c] =
        alpha > 0.0 ? add_shot_noise(clean, alpha,
                                     tuple_seed(config.seed, prepared[cell.image].id,
                                                config.grids[cell.grid], alpha))
                    : std::move(clean);
  });

  if (config.save_measurements) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const Cell& cell = cells[c];
      if (!prepared[cell.image].error.empty()) continue;
      const std::string name = prepared[cell.image].id + "_g" +
                               std::to_string(config.grids[cell.grid].rows) + "x" +
                               std::to_string(config.grids[cell.grid].cols) + "_a" +
                               format_double("%g", config.alphas[cell.alpha]);
      save_measurements(out_dir / (name + ".pmeas"), cell_measurements[c]);
    }
  }

  std::vector<Tuple> tuples;
  for (std::size_t c = 0; c < cells.size(); ++c)
    for (std::size_t s = 0; s < config.solvers.size(); ++s) tuples.push_back({cells[c], s});

  std::vector<ResultRow> rows(tuples.size());
  std::map<std::size_t, std::size_t> cell_index;
  for (std::size_t c = 0; c < cells.size(); ++c)
    cell_index[(cells[c].image * geometries.size() + cells[c].grid) * config.alphas.size() +
               cells[c].alpha] = c;

  parallel_for(tuples.size(), threads, [&](std::size_t t) {
    const Tuple& tuple = tuples[t];
    const Cell& cell = tuple.cell;
    const SolverSpec& spec = config.solvers[tuple.solver];
    const double alpha = config.alphas[cell.alpha];
    const PreparedImage& img = prepared[cell.image];

    ResultRow row;
    row.image = img.id;
    row.solver = spec.name;
    row.grid = config.grids[cell.grid];
    row.alpha = alpha;

    const std::string stem = img.id + "_" + spec.name + "_g" + std::to_string(row.grid.rows) +
                             "x" + std::to_string(row.grid.cols) + "_a" +
                             format_double("%g", alpha);
    if (!img.error.empty()) {
      row.error = "image preparation failed: " + img.error;
      rows[t] = row;
      return;
    }
    try {
      const std::size_t c =
          cell_index.at((cell.image * geometries.size() + cell.grid) * config.alphas.size() +
                        cell.alpha);
      const MeasurementSet& measurements = cell_measurements[c];
      const SolverConfig solver_config = to_solver_config(spec, alpha, config.border);

      const auto t0 = std::chrono::steady_clock::now();
      // Tuples already run in a pool; solvers stay single-threaded inside.
      SolverState state = run_solver(measurements, solver_config, 1);
      row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      row.iterations = state.iterations;

      row.metrics = compute_metrics(state.x, img.object, config.border);

      const ComplexImage aligned = global_phase_align(state.x, img.object);
      const auto [amp, phase] = decompose(aligned);
      save_cimg(out_dir / (stem + ".cimg"), aligned);
      save_png_gray(out_dir / (stem + "_amp.png"), amp);
      save_png_gray(out_dir / (stem + "_phase.png"), phase_to_unit(phase));

      if (config.save_residuals) {
        const double n = static_cast<double>(measurements.geometry.window_n) *
                         static_cast<double>(measurements.geometry.window_n);
        std::ofstream res(out_dir / (stem + "_residuals.csv"));
        res << residual_csv(state, solver_config, n);
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows[t] = row;
  });

  std::sort(rows.begin(), rows.end(), row_key_less);

  // Manifest with the per-image phase shifts and per-cell seeds.
  nlohmann::ordered_json manifest;
  manifest["seed"] = config.seed;
  manifest["border"] = config.border;
  manifest["crop"] = config.crop;
  manifest["probe"] = {{"window", config.probe.window}, {"radius", config.probe.radius}};
  nlohmann::ordered_json images = nlohmann::ordered_json::array();
  for (const auto& p : prepared) {
    nlohmann::ordered_json entry;
    entry["id"] = p.id;
    entry["object_seed"] = object_seed(config.seed, p.id);
    if (p.error.empty())
      entry["global_phase"] = format_double("%.17g", p.theta0);
    else
      entry["error"] = p.error;
    images.push_back(entry);
  }
  manifest["images"] = images;
  nlohmann::ordered_json cells_json = nlohmann::ordered_json::array();
  for (const auto& cell : cells) {
    nlohmann::ordered_json entry;
    entry["image"] = prepared[cell.image].id;
    entry["grid"] = {config.grids[cell.grid].rows, config.grids[cell.grid].cols};
    entry["alpha"] = config.alphas[cell.alpha];
    entry["measurement_seed"] =
        tuple_seed(config.seed, prepared[cell.image].id, config.grids[cell.grid],
                   config.alphas[cell.alpha]);
    cells_json.push_back(entry);
  }
  manifest["cells"] = cells_json;
  std::ofstream mf(out_dir / "manifest.json");
  mf << manifest.dump(2) << "\n";

  std::ofstream results(out_dir / "results.csv");
  results << results_csv(rows);
  const auto summary = summarize(rows);
  std::ofstream sum_csv(out_dir / "summary.csv");
  sum_csv << summary_csv(summary);
  std::ofstream sum_txt(out_dir / "summary.txt");
  sum_txt << summary_table(summary);

  return rows;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("summarize: no rows");

  std::map<std::tuple<Index, Index, double, std::string>, std::vector<const ResultRow*>> groups;
  for (const auto& row : rows) {
    if (!row.error.empty()) continue;
    groups[{row.grid.rows, row.grid.cols, row.alpha, row.solver}].push_back(&row);
  }

  std::vector<SummaryRow> out;
  for (const auto& [key, members] : groups) {
    SummaryRow s;
    s.grid = {std::get<0>(key), std::get<1>(key)};
    s.alpha = std::get<2>(key);
    s.solver = std::get<3>(key);
    s.images = static_cast<int>(members.size());
    double sum_a = 0, sum_p = 0;
    for (const auto* r : members) {
      sum_a += r->metrics.psnr_amplitude;
      sum_p += r->metrics.psnr_phase;
    }
    s.mean_psnr_amplitude = sum_a / s.images;
    s.mean_psnr_phase = sum_p / s.images;
    double var_a = 0, var_p = 0;
    for (const auto* r : members) {
      var_a += std::pow(r->metrics.psnr_amplitude - s.mean_psnr_amplitude, 2);
      var_p += std::pow(r->metrics.psnr_phase - s.mean_psnr_phase, 2);
    }
    s.std_psnr_amplitude = std::sqrt(var_a / s.images);  // population std
    s.std_psnr_phase = std::sqrt(var_p / s.images);
    out.push_back(s);
  }

  // Mark the best mean per (grid, alpha) group across solvers.
  for (auto& s : out) {
    bool best_a = true, best_p = true;
    for (const auto& other : out) {
      if (other.grid.rows != s.grid.rows || other.grid.cols != s.grid.cols ||
          other.alpha != s.alpha)
        continue;
      if (other.mean_psnr_amplitude > s.mean_psnr_amplitude) best_a = false;
      if (other.mean_psnr_phase > s.mean_psnr_phase) best_p = false;
    }
    s.best_amplitude = best_a;
    s.best_phase = best_p;
  }
  return out;
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::string csv =
      "image,solver,grid_rows,grid_cols,alpha,psnr_amplitude,psnr_phase,"
      "amplitude_saturated,phase_saturated,iterations,wall_time_s,error\n";
  for (const auto& r : rows) {
    csv += r.image + "," + r.solver + "," + std::to_string(r.grid.rows) + "," +
           std::to_string(r.grid.cols) + "," + format_double("%.6g", r.alpha) + ",";
    if (r.error.empty()) {
      csv += format_double("%.6f", r.metrics.psnr_amplitude) + "," +
             format_double("%.6f", r.metrics.psnr_phase) + "," +
             (r.metrics.amplitude_saturated ? "1" : "0") + "," +
             (r.metrics.phase_saturated ? "1" : "0") + "," + std::to_string(r.iterations) + "," +
             format_double("%.3f", r.wall_time) + ",";
    } else {
      std::string sanitized = r.error;
      for (char& ch : sanitized)
        if (ch == ',' || ch == '\n') ch = ';';
      csv += ",,,,," + format_double("%.3f", r.wall_time) + "," + sanitized;
    }
    csv += "\n";
  }
  return csv;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string csv =
      "solver,grid_rows,grid_cols,alpha,images,mean_psnr_amplitude,std_psnr_amplitude,"
      "mean_psnr_phase,std_psnr_phase,best_amplitude,best_phase\n";
  for (const auto& s : rows) {
    csv += s.solver + "," + std::to_string(s.grid.rows) + "," + std::to_string(s.grid.cols) + "," +
           format_double("%.6g", s.alpha) + "," + std::to_string(s.images) + "," +
           format_double("%.6f", s.mean_psnr_amplitude) + "," +
           format_double("%.6f", s.std_psnr_amplitude) + "," +
           format_double("%.6f", s.mean_psnr_phase) + "," +
           format_double("%.6f", s.std_psnr_phase) + "," + (s.best_amplitude ? "1" : "0") + "," +
           (s.best_phase ? "1" : "0") + "\n";
  }
  return csv;
}

std::string residual_csv(const SolverState& state, const SolverConfig& config,
                         double window_pixels) {
  const bool hqs = config.algorithm == Algorithm::hqs;
  const bool er = config.algorithm == Algorithm::error_reduction;
  std::string csv = "k,tau_k,mu_k,c_k,relative_residual\n";
  for (std::size_t k = 0; k < state.residual_history.size(); ++k) {
    const double tau = (hqs || er) ? config.schedule.tau[k] : 0.0;
    const double mu = hqs ? config.schedule.mu(static_cast<int>(k)) : 0.0;
    const double c = window_pixels / (window_pixels + mu);
    char line[200];
    std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g,%.17g,%.17g\n", k + 1, tau, mu, c,
                  state.residual_history[k]);
    csv += line;
  }
  return csv;
}

std::string summary_table(const std::vector<SummaryRow>& rows) {
  char line[256];
  std::string out;
  std::snprintf(line, sizeof(line), "%-16s %-9s %-8s %-6s %-20s %-20s\n", "solver", "grid",
                "alpha", "imgs", "PSNR_a (mean+-std)", "PSNR_phi (mean+-std)");
  out += line;
  for (const auto& s : rows) {
    const std::string grid = std::to_string(s.grid.rows) + "x" + std::to_string(s.grid.cols);
    std::snprintf(line, sizeof(line), "%-16s %-9s %-8.4g %-6d %8.2f +- %-5.2f %s %8.2f +- %-5.2f %s\n",
                  s.solver.c_str(), grid.c_str(), s.alpha, s.images, s.mean_psnr_amplitude,
                  s.std_psnr_amplitude, s.best_amplitude ? "*" : " ", s.mean_psnr_phase,
                  s.std_psnr_phase, s.best_phase ? "*" : " ");
    out += line;
  }
  return out;
}

}  // namespace ptycho
