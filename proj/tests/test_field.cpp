#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "choquard/field.hpp"
#include "oracles.hpp"

using namespace choquard;

namespace {

ScalarField random_complex(const GridSpec& g, unsigned long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  ScalarField f = ScalarField::zeros(g, PayloadKind::Complex);
  for (auto& z : f.data) z = {nd(rng), nd(rng)};
  return f;
}

}  // namespace

TEST_CASE("fft of a constant is the zero mode", "[field]") {
  auto g = GridSpec::make(2, 16, 4.0);
  ScalarField f = ScalarField::zeros(g, PayloadKind::Complex);
  for (auto& z : f.data) z = {2.5, -1.0};
  auto F = fft(f);
  const double expect = 2.5 * std::sqrt(static_cast<double>(g.npoints()));
  CHECK(std::abs(F.data[0] - std::complex<double>(expect, -0.4 * expect)) < 1e-10);
  for (std::size_t i = 1; i < F.size(); ++i) CHECK(std::abs(F.data[i]) < 1e-10);
}

TEST_CASE("single Fourier mode concentrates on one coefficient", "[field]") {
  auto g = GridSpec::make(1, 32, 3.0);
  ScalarField f = ScalarField::zeros(g, PayloadKind::Complex);
  const int mode = 5;
  for (int i = 0; i < g.n; ++i) {
    const double k = std::numbers::pi / g.L * mode;
    f.data[i] = std::exp(std::complex<double>(0.0, k * g.coord(i)));
  }
  auto F = fft(f);
  for (int i = 0; i < g.n; ++i) {
    if (i == mode)
      CHECK(std::abs(F.data[i]) > 1.0);
    else
      CHECK(std::abs(F.data[i]) < 1e-10);
  }
}

TEST_CASE("fft round trip and Parseval", "[field]") {
  for (int dim : {1, 2, 3}) {
    auto g = GridSpec::make(dim, dim == 3 ? 16 : 32, 5.0);
    auto f = random_complex(g, 1234 + dim);
    auto back = ifft(fft(f));
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      num += std::norm(back.data[i] - f.data[i]);
      den += std::norm(f.data[i]);
    }
    CHECK(std::sqrt(num / den) < 1e-12);
    CHECK(charge(fft(f)) == Catch::Approx(charge(f)).epsilon(1e-12));
  }
}

TEST_CASE("gradient of sin and constant fields", "[field]") {
  auto g = GridSpec::make(1, 64, 2.0);
  ScalarField f = ScalarField::zeros(g, PayloadKind::Real);
  const double k = std::numbers::pi / g.L;
  for (int i = 0; i < g.n; ++i) f.data[i] = std::sin(k * g.coord(i));
  auto df = gradient(f);
  REQUIRE(df.size() == 1);
  CHECK(df[0].is_real());
  for (int i = 0; i < g.n; ++i)
    CHECK(df[0].data[i].real() ==
          Catch::Approx(k * std::cos(k * g.coord(i))).margin(1e-10));

  ScalarField c = ScalarField::zeros(g, PayloadKind::Real);
  for (auto& z : c.data) z = 3.0;
  CHECK(linf_norm(gradient(c)[0]) < 1e-12);
  CHECK(linf_norm(laplacian(c)) < 1e-12);
}

TEST_CASE("laplacian equals divergence of gradient", "[field]") {
  auto g = GridSpec::make(2, 32, 4.0);
  auto f = make_random_smooth(g, 99, 4);
  auto lap = laplacian(f);
  auto grads = gradient(f);
  ScalarField div = ScalarField::zeros(g, PayloadKind::Real);
  for (int d = 0; d < g.dim; ++d) {
    auto dd = gradient(grads[d])[d];
    for (std::size_t i = 0; i < div.size(); ++i) div.data[i] += dd.data[i];
  }
  for (std::size_t i = 0; i < div.size(); ++i)
    CHECK(std::abs(div.data[i] - lap.data[i]) < 1e-10);
}

TEST_CASE("charge basics and grid-exact rescaling", "[field]") {
  auto g = GridSpec::make(2, 64, 8.0);
  CHECK(charge(ScalarField::zeros(g)) == 0.0);

  // normalized Gaussian: (pi w^2)^(-dim/2) * exp(-r^2/w^2) has unit L2 norm...
  // use |f|^2 = (1/(2 pi s^2)) e^{-r^2/(2 s^2)} in 2D -> charge 1
  const double s = 0.8;
  ScalarField f = ScalarField::zeros(g, PayloadKind::Real);
  for (std::size_t i = 0; i < f.size(); ++i) {
    auto x = g.point(i);
    const double r2 = x[0] * x[0] + x[1] * x[1];
    f.data[i] = std::sqrt(1.0 / (2.0 * std::numbers::pi * s * s)) *
                std::exp(-r2 / (4.0 * s * s));
  }
  CHECK(charge(f) == Catch::Approx(1.0).margin(1e-8));

  // grid-exact dilation by 2: U_eps[i] = eps^-gamma U(2 x_i), eps^-beta = 2,
  // N beta = 2 gamma  =>  charge preserved
  const int N = 2;
  const double beta = 1.0, gamma = 1.0;  // N*beta - 2*gamma = 0
  const double epsv = 0.5;               // eps^-beta = 2
  ScalarField fe = ScalarField::zeros(g, PayloadKind::Real);
  for (std::size_t i = 0; i < fe.size(); ++i) {
    auto c = g.unravel(i);
    std::array<int, 3> src{0, 0, 0};
    bool inside = true;
    for (int d = 0; d < N; ++d) {
      const int j = 2 * c[d] - g.n / 2;  // index of 2*x
      if (j < 0 || j >= g.n) inside = false;
      src[d] = j;
    }
    fe.data[i] = inside ? std::pow(epsv, -gamma) * f.data[g.ravel(src)] : 0.0;
  }
  const double expect = std::pow(epsv, N * beta - 2.0 * gamma) * charge(f);
  CHECK(charge(fe) == Catch::Approx(expect).epsilon(1e-6));
}

TEST_CASE("barycenter of a centered and shifted Gaussian", "[field]") {
  auto g = GridSpec::make(3, 32, 6.0);
  Vec3 c{0.75, -1.5, 0.375};  // grid-aligned offsets
  auto f = make_gaussian(g, c, 0.7);
  auto q = barycenter(f);
  for (int d = 0; d < 3; ++d) CHECK(q[d] == Catch::Approx(c[d]).margin(1e-8));

  // phase invariance: |f| unchanged under f -> e^{i phi(x)} f
  ScalarField fp = ScalarField::zeros(g, PayloadKind::Complex);
  for (std::size_t i = 0; i < f.size(); ++i) {
    auto x = g.point(i);
    fp.data[i] = f.data[i] * std::exp(std::complex<double>(0.0, 0.3 * x[0] - x[1]));
  }
  auto qp = barycenter(fp);
  for (int d = 0; d < 3; ++d) CHECK(qp[d] == Catch::Approx(q[d]).margin(1e-12));

  CHECK_THROWS(barycenter(ScalarField::zeros(g)));
}

TEST_CASE("barycenter translation covariance on grid shifts", "[field]") {
  auto g = GridSpec::make(2, 64, 8.0);
  auto f = make_gaussian(g, {0.0, 0.0, 0.0}, 0.9);
  auto q0 = barycenter(f);
  auto fs = shift(f, {8, -4, 0});
  auto q1 = barycenter(fs);
  CHECK(q1[0] - q0[0] == Catch::Approx(8 * g.spacing()).margin(1e-10));
  CHECK(q1[1] - q0[1] == Catch::Approx(-4 * g.spacing()).margin(1e-10));
}

TEST_CASE("mass outside ball limits and radial oracle", "[field]") {
  auto g = GridSpec::make(3, 64, 8.0);
  auto f = make_gaussian(g, {0.0, 0.0, 0.0}, 1.0);  // |f|^2 = e^{-r^2}
  CHECK(mass_outside_ball(f, {0, 0, 0}, 2.0 * g.L) == 0.0);
  // radius -> 0+: everything outside except any node exactly at the center
  Vec3 offc{g.spacing() / 2, g.spacing() / 2, g.spacing() / 2};
  auto fo = make_gaussian(g, offc, 1.0);
  CHECK(mass_outside_ball(fo, offc, 1e-12) == 1.0);
  CHECK(mass_outside_ball(f, {0, 0, 0}, 1e-12) > 0.99);

  // sharp-ball cut is first order in h; margin sized accordingly
  const double oracle = oracles::radial_mass_outside(
      3, [](double r) { return std::exp(-r * r / 2.0); }, 2.0, 8.0);
  CHECK(mass_outside_ball(f, {0, 0, 0}, 2.0) == Catch::Approx(oracle).margin(5e-3));
}

TEST_CASE("momentum integral", "[field]") {
  auto g = GridSpec::make(2, 64, 8.0);
  auto f = make_gaussian(g, {0.0, 0.0, 0.0}, 1.1);
  auto P0 = momentum_integral(f, 0.5);
  CHECK(std::abs(P0[0]) < 1e-12);
  CHECK(std::abs(P0[1]) < 1e-12);

  // plane phase: psi = f e^{i x.v/eps} -> integral = eps^-N v * charge
  const double eps = 0.5;
  Vec3 v{0.5, -0.25, 0.0};  // grid-resolved wavenumbers (multiples of pi/L/eps?)
  ScalarField psi = ScalarField::zeros(g, PayloadKind::Complex);
  for (std::size_t i = 0; i < f.size(); ++i) {
    auto x = g.point(i);
    const double ph = (x[0] * v[0] + x[1] * v[1]) / eps;
    psi.data[i] = f.data[i] * std::exp(std::complex<double>(0.0, ph));
  }
  auto P = momentum_integral(psi, eps);
  const double C = charge(psi);
  const double scale = std::pow(eps, -g.dim) * C;
  CHECK(P[0] == Catch::Approx(scale * v[0]).epsilon(1e-6));
  CHECK(P[1] == Catch::Approx(scale * v[1]).epsilon(1e-6));
  CHECK(std::isfinite(P[0]));
}
