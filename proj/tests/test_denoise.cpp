#include <doctest.h>

#include <cstdlib>
#include <string>
#include <vector>

#include "ptycho/denoiser.hpp"
#include "ptycho/external_denoiser.hpp"
#include "ptycho/rng.hpp"
#include "ptycho/tv.hpp"

using namespace ptycho;

namespace {

RealImage random_real(Index h, Index w, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  RealImage img(h, w);
  for (Index i = 0; i < img.size(); ++i) img.data()[i] = scale * (2.0 * rng.uniform() - 1.0);
  return img;
}

ComplexImage random_complex(Index h, Index w, std::uint64_t seed) {
  Rng rng(seed);
  ComplexImage img(h, w);
  for (Index i = 0; i < img.size(); ++i)
    img.data()[i] = Complex(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
  return img;
}

std::string dnzsrv_path() {
  const char* env = std::getenv("DNZSRV_BIN");
  REQUIRE_MESSAGE(env != nullptr, "DNZSRV_BIN must point at the dnzsrv helper");
  return env;
}

}  // namespace

TEST_CASE("tv_prox trivial inputs") {
  const RealImage v = random_real(6, 6, 3);
  CHECK((tv_prox(v, 0.0) - v).abs().maxCoeff() == 0.0);

  const RealImage flat = RealImage::Constant(6, 6, 2.5);
  CHECK((tv_prox(flat, 0.7, 500, 1e-12) - flat).abs().maxCoeff() < 1e-12);
}

TEST_CASE("tv_prox matches the two-pixel closed form") {
  auto closed_form = [](double a, double b, double tau) {
    const double mean = 0.5 * (a + b);
    if (std::abs(a - b) <= 2.0 * tau) return std::pair{mean, mean};
    const double shrink = tau * (a > b ? 1.0 : -1.0);
    return std::pair{a - shrink, b + shrink};
  };

  for (auto [a, b, tau] : {std::tuple{1.0, 0.0, 0.2}, std::tuple{-0.3, 1.7, 0.4},
                           std::tuple{2.0, -1.0, 5.0}, std::tuple{0.5, 0.5, 0.1}}) {
    RealImage v(1, 2);
    v << a, b;
    const RealImage u = tv_prox(v, tau, 20000, 1e-14);
    const auto [ea, eb] = closed_form(a, b, tau);
    CHECK(u(0, 0) == doctest::Approx(ea).epsilon(1e-9));
    CHECK(u(0, 1) == doctest::Approx(eb).epsilon(1e-9));
  }
}

TEST_CASE("tv_prox dual objective decreases monotonically across inner iterations") {
  const RealImage v = random_real(16, 16, 9);
  std::vector<double> trace;
  const RealImage u = tv_prox(v, 0.3, 200, 0.0, &trace);
  REQUIRE(trace.size() == 200);
  for (std::size_t t = 1; t < trace.size(); ++t) CHECK(trace[t] <= trace[t - 1] + 1e-12);
  // and the prox output improves the primal objective over the input
  CHECK(tv_objective(u, v, 0.3) < tv_objective(v, v, 0.3));
}

TEST_CASE("tv_prox is non-expansive on random pairs") {
  const double tol = 1e-7;
  for (int trial = 0; trial < 5; ++trial) {
    const RealImage a = random_real(8, 8, 100 + trial);
    const RealImage b = random_real(8, 8, 200 + trial);
    const RealImage ta = tv_prox(a, 0.25, 5000, tol);
    const RealImage tb = tv_prox(b, 0.25, 5000, tol);
    const double dist_in = std::sqrt((a - b).square().sum());
    const double dist_out = std::sqrt((ta - tb).square().sum());
    CHECK(dist_out <= dist_in + 10.0 * tol);
  }
}

TEST_CASE("tv_prox commutes with global intensity shift") {
  const RealImage v = random_real(10, 10, 33);
  const double c = 4.2;
  const RealImage t1 = tv_prox(v, 0.3, 300, 1e-10) + c;
  const RealImage t2 = tv_prox(RealImage(v + c), 0.3, 300, 1e-10);
  CHECK((t1 - t2).abs().maxCoeff() < 1e-12);
}

TEST_CASE("tv_prox_weighted input validation") {
  const RealImage v = random_real(4, 4, 1);
  RealImage w = RealImage::Ones(4, 4);
  w(1, 1) = 0.0;
  CHECK_THROWS_AS(tv_prox_weighted(v, 0.2, w), std::invalid_argument);
  CHECK_THROWS_AS(tv_prox_weighted(v, 0.2, RealImage::Ones(3, 3)), std::invalid_argument);
}

TEST_CASE("tv_prox_weighted reduces to tv_prox for constant weight") {
  const RealImage v = random_real(8, 8, 5);
  const double tau = 0.4;
  const double d = 1.8;
  const RealImage weighted =
      tv_prox_weighted(v, tau, RealImage::Constant(8, 8, d), 20000, 1e-13);
  const RealImage plain = tv_prox(v, tau / (d * d), 20000, 1e-13);
  CHECK((weighted - plain).abs().maxCoeff() < 1e-5);
}

TEST_CASE("tv_prox_weighted pins pixels with huge weight") {
  const RealImage v = random_real(6, 6, 8);
  RealImage w = RealImage::Ones(6, 6);
  w(2, 3) = 1e6;
  const RealImage u = tv_prox_weighted(v, 0.5, w, 5000, 1e-12);
  CHECK(std::abs(u(2, 3) - v(2, 3)) <= 1e-5);
}

TEST_CASE("tv_prox_weighted improves the objective and approaches the long-run solution") {
  const RealImage v = random_real(4, 4, 44);
  Rng rng(45);
  RealImage w(4, 4);
  for (Index i = 0; i < w.size(); ++i) w.data()[i] = 0.5 + 2.0 * rng.uniform();
  const double tau = 0.35;

  const RealImage u = tv_prox_weighted(v, tau, w, 400, 0.0);
  const double ju = tv_weighted_objective(u, v, tau, w);
  CHECK(ju <= tv_weighted_objective(v, v, tau, w) + 1e-12);
  CHECK(ju <= tv_weighted_objective(tv_prox(v, tau), v, tau, w) + 1e-12);

  const RealImage u10 = tv_prox_weighted(v, tau, w, 4000, 0.0);
  const double j10 = tv_weighted_objective(u10, v, tau, w);
  CHECK(ju <= j10 + 1e-4);  // near-converged: within solver tolerance of the long run
}

TEST_CASE("nonneg projection") {
  RealImage v(1, 2);
  v << -1.0, 2.0;
  const RealImage p = nonneg_projection(v);
  CHECK(p(0, 0) == 0.0);
  CHECK(p(0, 1) == 2.0);
  CHECK((nonneg_projection(p) - p).abs().maxCoeff() == 0.0);

  const RealImage pos = RealImage::Constant(3, 3, 0.5);
  CHECK((nonneg_projection(pos) - pos).abs().maxCoeff() == 0.0);
}

TEST_CASE("complex split denoise") {
  const ComplexImage z = random_complex(8, 8, 21);

  SUBCASE("identity base is the exact identity") {
    const auto identity = [](const RealImage& v, double) { return v; };
    const ComplexImage out = complex_split_denoise(z, 0.4, identity);
    for (Index i = 0; i < z.size(); ++i) CHECK(out.data()[i] == z.data()[i]);
  }

  SUBCASE("nonneg base never clips after the amplitude shift") {
    const auto base = [](const RealImage& v, double) { return nonneg_projection(v); };
    const ComplexImage out = complex_split_denoise(z, 0.4, base);
    CHECK((out.real() - z.real()).abs().maxCoeff() < 1e-12);
  }

  SUBCASE("matches two direct shifted tv_prox calls") {
    const double tau = 0.3;
    const auto base = [tau](const RealImage& v, double) { return tv_prox(v, tau, 100, 1e-8); };
    const ComplexImage out = complex_split_denoise(z, tau, base);

    const double s = z.abs().maxCoeff();
    const RealImage re = tv_prox(RealImage(z.real() + s), tau, 100, 1e-8) - s;
    const RealImage im = tv_prox(RealImage(z.imag() + s), tau, 100, 1e-8) - s;
    CHECK((out.real() - re).abs().maxCoeff() < 1e-12);
    CHECK((out.imag() - im).abs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("denoiser kinds") {
  const ComplexImage z = random_complex(6, 6, 31);

  SUBCASE("identity") {
    Denoiser d(DenoiserConfig{});
    CHECK((d.denoise(z, 10.0) - z).abs().maxCoeff() == 0.0);
  }

  SUBCASE("nonneg projection zeroes imaginary part and clips") {
    DenoiserConfig config;
    config.kind = DenoiserKind::nonneg_projection;
    Denoiser d(config);
    const ComplexImage out = d.denoise(z, 1.0);
    CHECK(out.imag().abs().maxCoeff() == 0.0);
    CHECK(out.real().minCoeff() >= 0.0);
    CHECK((out.real() - z.real().max(0.0)).abs().maxCoeff() == 0.0);
  }

  SUBCASE("tv strength scale maps 8-bit strengths onto the prox weight") {
    DenoiserConfig config;
    config.kind = DenoiserKind::tv;
    config.tv_max_iter = 200;
    config.tv_tol = 1e-10;
    Denoiser d(config);
    const ComplexImage out = d.denoise(z, 25.5);  // prox weight 0.1
    const ComplexImage direct = complex_split_denoise(
        z, 0.0, [](const RealImage& v, double) { return tv_prox(v, 0.1, 200, 1e-10); });
    CHECK((out - direct).abs().maxCoeff() < 1e-12);
  }

  SUBCASE("weighted tv with unit weight equals plain tv") {
    DenoiserConfig config;
    config.kind = DenoiserKind::tv;
    config.tv_max_iter = 4000;
    config.tv_tol = 1e-12;
    Denoiser d(config);
    const ComplexImage plain = d.denoise(z, 20.0);
    const ComplexImage weighted = d.denoise_weighted(z, 20.0, RealImage::Ones(6, 6));
    CHECK((plain - weighted).abs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("external denoiser protocol") {
  const std::string bin = dnzsrv_path();
  const ComplexImage z = random_complex(5, 7, 41);

  SUBCASE("echo server returns the image unchanged") {
    const ComplexImage out = external_denoise(z, 1.5, {bin, "echo"}, 20.0);
    CHECK((out - z).abs().maxCoeff() == 0.0);
  }

  SUBCASE("double server doubles values") {
    const ComplexImage out = external_denoise(z, 1.5, {bin, "double"}, 20.0);
    CHECK((out - 2.0 * z).abs().maxCoeff() == 0.0);
  }

  SUBCASE("real-mode request") {
    const RealImage v = random_real(4, 6, 42);
    const RealImage out = external_denoise(v, 0.5, {bin, "double"}, 20.0);
    CHECK((out - 2.0 * v).abs().maxCoeff() == 0.0);
  }

  SUBCASE("tv server matches the built-in denoiser") {
    DenoiserConfig config;
    config.kind = DenoiserKind::tv;
    const ComplexImage internal = Denoiser(config).denoise(z, 12.0);
    const ComplexImage remote = external_denoise(z, 12.0, {bin, "tv"}, 20.0);
    CHECK((internal - remote).abs().maxCoeff() < 1e-12);
  }

  SUBCASE("error paths are reported distinctly") {
    using Kind = ExternalDenoiserError::Kind;
    auto kind_of = [&](const std::vector<std::string>& cmd, double timeout) {
      try {
        external_denoise(z, 1.0, cmd, timeout);
      } catch (const ExternalDenoiserError& e) {
        return e.kind();
      }
      FAIL("expected an ExternalDenoiserError");
      return Kind::spawn;
    };
    CHECK(kind_of({"/nonexistent/denoiser"}, 20.0) == Kind::spawn);
    CHECK(kind_of({bin, "truncate"}, 20.0) == Kind::malformed_response);
    CHECK(kind_of({bin, "badmagic"}, 20.0) == Kind::malformed_response);
    CHECK(kind_of({bin, "fail"}, 20.0) == Kind::process_failure);
    CHECK(kind_of({bin, "slow"}, 0.5) == Kind::timeout);
  }

  SUBCASE("external denoiser kind goes through the Denoiser interface") {
    DenoiserConfig config;
    config.kind = DenoiserKind::external;
    config.external_command = {bin, "echo"};
    Denoiser d(config);
    CHECK_FALSE(d.supports_weighted());
    CHECK((d.denoise(z, 3.0) - z).abs().maxCoeff() == 0.0);
  }
}
