#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ptycho/dataset.hpp"
#include "ptycho/experiment.hpp"
#include "ptycho/image.hpp"
#include "ptycho/image_io.hpp"
#include "test_images.hpp"

using namespace ptycho;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ptycho_harness" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// results.csv with the wall_time_s column blanked out.
std::string strip_wall_time(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    int field = 0;
    std::string cleaned;
    std::string current;
    for (char c : line) {
      if (c == ',') {
        if (field != 10) cleaned += current;
        cleaned += ',';
        current.clear();
        ++field;
      } else {
        current += c;
      }
    }
    if (field != 10) cleaned += current;
    out += cleaned + "\n";
  }
  return out;
}

ExperimentConfig small_config(const fs::path& out_dir, const std::vector<std::string>& images) {
  ExperimentConfig config;
  config.images = images;
  config.crop = 96;
  config.probe = {32, 12.0};
  config.grids = {{5, 5}};
  config.alphas = {20.0};
  config.seed = 7;
  config.border = 10;
  config.out_dir = out_dir.string();
  config.threads = 1;

  SolverSpec simpie;
  simpie.name = "simpie";
  simpie.algorithm = Algorithm::simpie;
  simpie.schedule.iterations = 25;
  simpie.init.kind = InitPolicy::Kind::flat;
  config.solvers = {simpie};
  return config;
}

}  // namespace

TEST_CASE("rgb_to_complex follows the amplitude/phase recipe") {
  RgbImage rgb{RealImage(1, 3), RealImage(1, 3), RealImage(1, 3)};
  rgb.r << 1.0, 0.0, 0.4;
  rgb.g << 1.0, 0.0, 0.6;
  rgb.b << 0.5, 0.9, 0.25;

  double theta0 = 0.0;
  const ComplexImage out = rgb_to_complex(rgb, 11, &theta0);

  // midpoint blue maps to phase theta0 exactly
  CHECK(std::abs(out(0, 0)) == doctest::Approx(1.0));
  CHECK(std::arg(out(0, 0)) == doctest::Approx(wrap_phase(theta0)));

  // zero amplitude regardless of blue
  CHECK(std::abs(out(0, 1)) == 0.0);

  CHECK(std::abs(out(0, 2)) == doctest::Approx(0.5));
  CHECK(std::arg(out(0, 2)) ==
        doctest::Approx(wrap_phase(2.0 * std::numbers::pi * 0.25 - std::numbers::pi + theta0)));

  SUBCASE("fixed seed reproduces bit-identical objects") {
    double t1 = 0.0, t2 = 0.0;
    const ComplexImage a = rgb_to_complex(rgb, 42, &t1);
    const ComplexImage b = rgb_to_complex(rgb, 42, &t2);
    CHECK(t1 == t2);
    CHECK((a - b).abs().maxCoeff() == 0.0);
    const ComplexImage c = rgb_to_complex(rgb, 43);
    CHECK((a - c).abs().maxCoeff() > 0.0);
  }
}

TEST_CASE("theta0 is uniform in [-pi, pi)") {
  RgbImage px{RealImage::Ones(1, 1), RealImage::Ones(1, 1), RealImage::Ones(1, 1)};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    double theta0 = 0.0;
    rgb_to_complex(px, seed, &theta0);
    CHECK(theta0 >= -std::numbers::pi);
    CHECK(theta0 < std::numbers::pi);
  }
}

TEST_CASE("tuple seeds separate images, grids and noise levels") {
  const std::uint64_t base = tuple_seed(1, "img_a", {7, 7}, 20.0);
  CHECK(tuple_seed(1, "img_a", {7, 7}, 20.0) == base);
  CHECK(tuple_seed(1, "img_b", {7, 7}, 20.0) != base);
  CHECK(tuple_seed(1, "img_a", {9, 9}, 20.0) != base);
  CHECK(tuple_seed(1, "img_a", {7, 7}, 10.0) != base);
  CHECK(tuple_seed(2, "img_a", {7, 7}, 20.0) != base);
  CHECK(object_seed(1, "img_a") != object_seed(1, "img_b"));
}

TEST_CASE("summarize computes population statistics and best markers") {
  ResultRow a{"i1", "s1", {7, 7}, 20.0, {}, 10, 0.0, ""};
  a.metrics.psnr_amplitude = 20.0;
  a.metrics.psnr_phase = 22.0;
  ResultRow b = a;
  b.image = "i2";
  b.metrics.psnr_amplitude = 24.0;
  b.metrics.psnr_phase = 26.0;
  ResultRow c = a;
  c.solver = "s2";
  c.metrics.psnr_amplitude = 30.0;
  ResultRow d = b;
  d.solver = "s2";
  d.metrics.psnr_amplitude = 30.0;

  const auto summary = summarize({a, b, c, d});
  REQUIRE(summary.size() == 2);
  const auto& s1 = summary[0].solver == "s1" ? summary[0] : summary[1];
  const auto& s2 = summary[0].solver == "s2" ? summary[0] : summary[1];
  CHECK(s1.images == 2);
  CHECK(s1.mean_psnr_amplitude == doctest::Approx(22.0));
  CHECK(s1.std_psnr_amplitude == doctest::Approx(2.0));  // population std
  CHECK(s2.mean_psnr_amplitude == doctest::Approx(30.0));
  CHECK(s2.std_psnr_amplitude == doctest::Approx(0.0));
  CHECK(s2.best_amplitude);
  CHECK_FALSE(s1.best_amplitude);
  CHECK(s1.best_phase);  // s2 shares s1's phase values... both marked
}

TEST_CASE("summarize single row and error rows") {
  ResultRow ok{"i1", "s1", {3, 3}, 0.0, {}, 5, 0.0, ""};
  ok.metrics.psnr_amplitude = 31.0;
  ResultRow failed = ok;
  failed.image = "i2";
  failed.error = "boom";
  const auto summary = summarize({ok, failed});
  REQUIRE(summary.size() == 1);
  CHECK(summary[0].images == 1);
  CHECK(summary[0].mean_psnr_amplitude == doctest::Approx(31.0));
  CHECK(summary[0].std_psnr_amplitude == 0.0);
}

TEST_CASE("experiment and solver configs parse from JSON") {
  const fs::path dir = fresh_dir("json");
  const fs::path cfg = dir / "exp.json";
  {
    std::ofstream out(cfg);
    out << R"({
      "images": ["a.png"],
      "crop": 128,
      "probe": {"window": 48, "radius": 18.5},
      "grids": [[5, 6]],
      "alphas": [0.0, 20.0],
      "seed": 77,
      "border": 12,
      "out_dir": "x",
      "solvers": [
        {"name": "base", "algorithm": "simpie", "iterations": 40},
        {"algorithm": "hqs",
         "schedule": {"tau_start": 25.0, "tau_end": 5.0, "iterations": 300,
                      "lambda_tilde": 0.001, "sigma_hat": 7.0},
         "denoiser": {"kind": "tv", "strength_scale": 0.01, "max_iter": 80, "tol": 1e-6},
         "init": "flat",
         "weighted_prox": false}
      ]
    })";
  }
  const ExperimentConfig config = load_experiment_config(cfg);
  CHECK(config.crop == 128);
  CHECK(config.probe.window == 48);
  CHECK(config.probe.radius == doctest::Approx(18.5));
  REQUIRE(config.grids.size() == 1);
  CHECK(config.grids[0].rows == 5);
  CHECK(config.grids[0].cols == 6);
  CHECK(config.seed == 77);
  REQUIRE(config.solvers.size() == 2);
  CHECK(config.solvers[0].name == "base");
  CHECK(config.solvers[0].init.kind == InitPolicy::Kind::flat);
  const SolverSpec& hqs = config.solvers[1];
  CHECK(hqs.name == "hqs");  // defaults to the algorithm name
  CHECK(hqs.schedule.tau_start == 25.0);
  CHECK(hqs.schedule.sigma_hat.has_value());
  CHECK(hqs.denoiser.kind == DenoiserKind::tv);
  CHECK(hqs.denoiser.tv_max_iter == 80);
  CHECK_FALSE(hqs.use_weighted_prox);

  // sigma_hat resolution when unset: falls back to alpha (or 1 when noiseless)
  SolverSpec auto_sigma = hqs;
  auto_sigma.schedule.sigma_hat.reset();
  CHECK(to_solver_config(auto_sigma, 20.0, -1).schedule.sigma_hat == 20.0);
  CHECK(to_solver_config(auto_sigma, 0.0, -1).schedule.sigma_hat == 1.0);
  CHECK(to_solver_config(hqs, 20.0, -1).schedule.sigma_hat == 7.0);

  // hqs solvers default to the 100-iteration warm start when init is absent
  const fs::path sly = dir / "solver.json";
  {
    std::ofstream out(sly);
    out << R"({"algorithm": "hqs", "schedule": {"iterations": 10}})";
  }
  const SolverSpec defaulted = load_solver_spec(sly);
  CHECK(defaulted.init.kind == InitPolicy::Kind::simpie_warmstart);
  CHECK(defaulted.init.warm_iterations == 100);

  // external denoisers require a command
  const fs::path bad = dir / "bad.json";
  {
    std::ofstream out(bad);
    out << R"({"algorithm": "hqs", "denoiser": {"kind": "external"}})";
  }
  CHECK_THROWS_AS(load_solver_spec(bad), std::invalid_argument);
}

TEST_CASE("config validation rejects empty sweeps") {
  ExperimentConfig config = small_config(fresh_dir("validate"), {"x.png"});
  SUBCASE("no alphas") {
    config.alphas.clear();
    CHECK_THROWS_AS(validate_config(config), std::invalid_argument);
  }
  SUBCASE("no images") {
    config.images.clear();
    CHECK_THROWS_AS(validate_config(config), std::invalid_argument);
  }
  SUBCASE("no solvers") {
    config.solvers.clear();
    CHECK_THROWS_AS(validate_config(config), std::invalid_argument);
  }
  SUBCASE("duplicate solver names") {
    config.solvers.push_back(config.solvers.front());
    CHECK_THROWS_AS(validate_config(config), std::invalid_argument);
  }
  SUBCASE("border too large") {
    config.border = 48;
    CHECK_THROWS_AS(validate_config(config), std::invalid_argument);
  }
}

TEST_CASE("run_experiment smoke test: simpie beats the flat initialization") {
  const fs::path dir = fresh_dir("smoke");
  const fs::path img_path = dir / "scene.png";
  save_png_rgb(img_path, testimg::make_synthetic_rgb(96, 96, 123));

  ExperimentConfig config = small_config(dir / "out", {img_path.string()});
  config.alphas = {0.0};
  const auto rows = run_experiment(config);
  REQUIRE(rows.size() == 1);
  REQUIRE(rows[0].error.empty());

  const ComplexImage gt = load_cimg(dir / "out" / "scene_gt.cimg");
  const MetricReport flat = compute_metrics(flat_init(96, 96), gt, config.border);
  CHECK(rows[0].metrics.psnr_amplitude > flat.psnr_amplitude);

  CHECK(fs::exists(dir / "out" / "results.csv"));
  CHECK(fs::exists(dir / "out" / "summary.csv"));
  CHECK(fs::exists(dir / "out" / "summary.txt"));
  CHECK(fs::exists(dir / "out" / "manifest.json"));
  CHECK(fs::exists(dir / "out" / "scene_simpie_g5x5_a0_amp.png"));
}

TEST_CASE("run_experiment records per-tuple errors and continues") {
  const fs::path dir = fresh_dir("errors");
  const fs::path good = dir / "good.png";
  save_png_rgb(good, testimg::make_synthetic_rgb(96, 96, 5));

  ExperimentConfig config =
      small_config(dir / "out", {good.string(), (dir / "missing.png").string()});
  config.solvers[0].schedule.iterations = 2;
  const auto rows = run_experiment(config);
  REQUIRE(rows.size() == 2);
  int ok = 0, failed = 0;
  for (const auto& row : rows) (row.error.empty() ? ok : failed)++;
  CHECK(ok == 1);
  CHECK(failed == 1);
}

TEST_CASE("run_experiment reruns are byte-identical apart from wall time") {
  const fs::path dir = fresh_dir("determinism");
  const fs::path img_path = dir / "scene.png";
  save_png_rgb(img_path, testimg::make_synthetic_rgb(96, 96, 321));

  ExperimentConfig config = small_config(dir / "run1", {img_path.string()});
  const auto rows1 = run_experiment(config);
  config.out_dir = (dir / "run2").string();
  config.threads = 2;
  const auto rows2 = run_experiment(config);

  CHECK(strip_wall_time(results_csv(rows1)) == strip_wall_time(results_csv(rows2)));
  CHECK(summary_csv(summarize(rows1)) == summary_csv(summarize(rows2)));
}
