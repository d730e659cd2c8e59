#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "choquard/epstein.hpp"
#include "choquard/riesz.hpp"
#include "oracles.hpp"

using namespace choquard;

TEST_CASE("epstein zeta reference values", "[riesz]") {
  // Z_3(1) is the classical simple-cubic lattice constant
  CHECK(epstein_zeta(3, 1.0) == Catch::Approx(-2.8372974794806).margin(1e-10));
  // Z_1(s) = 2 zeta(s)
  CHECK(epstein_zeta(1, 2.0) ==
        Catch::Approx(2.0 * std::numbers::pi * std::numbers::pi / 6.0).margin(1e-12));
  CHECK(epstein_zeta(1, -1.0) == Catch::Approx(-1.0 / 6.0).margin(1e-10));
  // continuation at s = 0
  CHECK(epstein_zeta(2, 0.0) == -1.0);
}

TEST_CASE("build rejects theta outside (0, dim)", "[riesz]") {
  auto g = GridSpec::make(2, 16, 4.0);
  CHECK_THROWS(RieszOperator::build(g, 2.0, RieszMode::FreeSpace));
  CHECK_THROWS(RieszOperator::build(g, -0.5, RieszMode::Periodic));
  CHECK_NOTHROW(RieszOperator::build(g, 1.0, RieszMode::FreeSpace));
}

TEST_CASE("kernel spectrum is nonnegative, periodic zero mode is zero", "[riesz]") {
  auto g = GridSpec::make(2, 32, 6.0);
  auto fs = RieszOperator::build(g, 1.0, RieszMode::FreeSpace);
  for (double s : fs.kernel_spectrum()) {
    CHECK(s >= 0.0);
    CHECK(std::isfinite(s));
  }
  auto pr = RieszOperator::build(g, 1.0, RieszMode::Periodic);
  CHECK(pr.kernel_spectrum()[0] == 0.0);
  for (double s : pr.kernel_spectrum()) CHECK(s >= 0.0);
}

TEST_CASE("periodic multiplier is radially symmetric on |k|-shells", "[riesz]") {
  auto g = GridSpec::make(2, 16, 4.0);
  auto op = RieszOperator::build(g, 1.3, RieszMode::Periodic);
  const auto& s = op.kernel_spectrum();
  const int nlast = g.n / 2 + 1;
  // (k0, k1) and (k1, k0) with both in the stored half: compare (1,2) vs (2,1)
  auto at = [&](int i0, int il) { return s[static_cast<std::size_t>(i0) * nlast + il]; };
  CHECK(at(1, 2) == Catch::Approx(at(2, 1)).epsilon(1e-14));
  CHECK(at(3, 5) == Catch::Approx(at(5, 3)).epsilon(1e-14));
  // reflection in the full first axis: k and -k
  CHECK(at(g.n - 1, 2) == Catch::Approx(at(1, 2)).epsilon(1e-14));
}

TEST_CASE("free-space convolution matches the direct sum on a tiny grid", "[riesz]") {
  for (int dim : {1, 2}) {
    auto g = GridSpec::make(dim, 16, 3.0);
    const double theta = dim == 1 ? 0.5 : 1.0;
    auto op = RieszOperator::build(g, theta, RieszMode::FreeSpace);
    auto f = make_gaussian(g, {0.25, -0.5, 0.0}, 0.6);
    auto viaFFT = op.convolve(f);

    const int N = g.dim;
    const double h = g.spacing();
    const double c = riesz_normalization(N, theta);
    const double Z0 = epstein_zeta(N, N - theta);
    const double Z2 = epstein_zeta(N, N - theta - 2.0);
    const double w_origin = -c * std::pow(h, theta - N) * (Z0 - Z2);
    const double w_nb = -c * std::pow(h, theta - N) * Z2 / (2.0 * N);
    auto direct = oracles::direct_free_convolution(f, theta, w_origin, w_nb);
    for (std::size_t i = 0; i < f.size(); ++i)
      CHECK(std::abs(viaFFT.data[i] - direct.data[i]) < 1e-12 * (1.0 + std::abs(direct.data[i])));
  }
}

TEST_CASE("Gaussian convolution at the origin against the radial oracle", "[riesz]") {
  struct Case {
    int dim, n;
    double L, theta, tol;
  };
  for (auto cs : {Case{1, 64, 8.0, 0.5, 1e-4}, Case{2, 64, 8.0, 1.0, 1e-4},
                  Case{3, 32, 8.0, 2.0, 5e-4}}) {
    auto g = GridSpec::make(cs.dim, cs.n, cs.L);
    auto op = RieszOperator::build(g, cs.theta, RieszMode::FreeSpace);
    ScalarField f = ScalarField::zeros(g, PayloadKind::Real);
    for (std::size_t i = 0; i < f.size(); ++i) {
      auto x = g.point(i);
      double r2 = 0.0;
      for (int d = 0; d < cs.dim; ++d) r2 += x[d] * x[d];
      f.data[i] = std::exp(-r2);
    }
    auto conv = op.convolve(f);
    std::array<int, 3> c0{0, 0, 0};
    for (int d = 0; d < cs.dim; ++d) c0[d] = cs.n / 2;
    const double got = conv.data[g.ravel(c0)].real();
    const double want = oracles::riesz_convolution_at_origin(
        cs.dim, cs.theta, [](double r) { return std::exp(-r * r); }, cs.L);
    CAPTURE(cs.dim, cs.theta, got, want);
    CHECK(std::abs(got - want) < cs.tol);
  }
}

TEST_CASE("grid refinement drives the Gaussian value monotonically down", "[riesz]") {
  for (int dim : {1, 2}) {
    const double theta = dim == 1 ? 0.5 : 1.0;
    const double want = oracles::riesz_convolution_at_origin(
        dim, theta, [](double r) { return std::exp(-r * r); }, 8.0);
    double prev = 1e9;
    for (int n : {32, 64, 128}) {
      auto g = GridSpec::make(dim, n, 8.0);
      auto op = RieszOperator::build(g, theta, RieszMode::FreeSpace);
      ScalarField f = ScalarField::zeros(g, PayloadKind::Real);
      for (std::size_t i = 0; i < f.size(); ++i) {
        auto x = g.point(i);
        double r2 = 0.0;
        for (int d = 0; d < dim; ++d) r2 += x[d] * x[d];
        f.data[i] = std::exp(-r2);
      }
      auto conv = op.convolve(f);
      std::array<int, 3> c0{0, 0, 0};
      for (int d = 0; d < dim; ++d) c0[d] = n / 2;
      const double err = std::abs(conv.data[g.ravel(c0)].real() - want);
      CHECK(err < prev);
      prev = err;
    }
  }
}

TEST_CASE("linearity and translation equivariance", "[riesz]") {
  auto g = GridSpec::make(2, 32, 5.0);
  auto op = RieszOperator::build(g, 1.0, RieszMode::FreeSpace);
  auto f = make_gaussian(g, {0.0, 0.0, 0.0}, 0.55);
  auto h = make_gaussian(g, {0.9375, 0.0, 0.0}, 0.5);
  ScalarField lin = ScalarField::zeros(g, PayloadKind::Real);
  for (std::size_t i = 0; i < g.npoints(); ++i)
    lin.data[i] = 2.0 * f.data[i] + 0.5 * h.data[i];
  auto c1 = op.convolve(lin);
  auto cf = op.convolve(f);
  auto ch = op.convolve(h);
  for (std::size_t i = 0; i < g.npoints(); ++i)
    CHECK(std::abs(c1.data[i] - 2.0 * cf.data[i] - 0.5 * ch.data[i]) < 1e-12);

  // free-space output is not periodic, so cyclic-shift equivariance holds in
  // the interior; compare there
  auto fs = shift(f, {4, -6, 0});
  auto conv_shift = op.convolve(fs);
  auto shift_conv = shift(cf, {4, -6, 0});
  double maxdiff = 0.0;
  for (std::size_t i = 0; i < g.npoints(); ++i) {
    auto x = g.point(i);
    if (std::abs(x[0]) > g.L / 2 || std::abs(x[1]) > g.L / 2) continue;
    maxdiff = std::max(maxdiff, std::abs(conv_shift.data[i] - shift_conv.data[i]));
  }
  CHECK(maxdiff < 1e-7);

  // periodic mode: circular convolution, equivariance is exact everywhere
  auto opp = RieszOperator::build(g, 1.0, RieszMode::Periodic);
  auto pc = opp.convolve(f);
  auto pcs = opp.convolve(shift(f, {4, -6, 0}));
  auto spc = shift(pc, {4, -6, 0});
  double pmax = 0.0;
  for (std::size_t i = 0; i < g.npoints(); ++i)
    pmax = std::max(pmax, std::abs(pcs.data[i] - spc.data[i]));
  CHECK(pmax < 1e-12);
}

TEST_CASE("self-adjointness and positive quadratic form", "[riesz]") {
  auto g = GridSpec::make(2, 32, 4.0);
  for (auto mode : {RieszMode::FreeSpace, RieszMode::Periodic}) {
    auto op = RieszOperator::build(g, 1.0, mode);
    for (unsigned long seed : {11ul, 12ul, 13ul}) {
      auto f = make_random_smooth(g, seed);
      auto h = make_random_smooth(g, seed + 100);
      for (auto& z : f.data) z = std::abs(z.real());
      for (auto& z : h.data) z = std::abs(z.real());
      const double a = inner_real(op.convolve(f), h);
      const double b = inner_real(f, op.convolve(h));
      CHECK(a == Catch::Approx(b).margin(1e-10 * (1.0 + std::abs(a))));
      // positivity for signed fields as well
      auto s = make_random_smooth(g, seed + 200);
      CHECK(inner_real(op.convolve(s), s) > -1e-10);
    }
  }
}

TEST_CASE("free-space vs periodic agree on a roomy box", "[riesz]") {
  // Removing the k = 0 mode is a neutralizing (jellium) background: inside
  // the support the two modes differ by c0 + c2 |x|^2; beyond that, image
  // corrections are a high-order multipole effect.
  auto g = GridSpec::make(2, 128, 12.0);  // support radius ~3 => box 4x support
  const double theta = 1.0;
  auto fs = RieszOperator::build(g, theta, RieszMode::FreeSpace);
  auto pr = RieszOperator::build(g, theta, RieszMode::Periodic);
  auto f = make_gaussian(g, {0.0, 0.0, 0.0}, 1.0);
  auto a = fs.convolve(f);
  auto b = pr.convolve(f);
  // least-squares fit of diff = c0 + c2 |x|^2 over the support region
  double s0 = 0, s2 = 0, s4 = 0, d0 = 0, d2 = 0;
  const double rsup = 3.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto x = g.point(i);
    const double r2 = x[0] * x[0] + x[1] * x[1];
    if (r2 > rsup * rsup) continue;
    const double diff = a.data[i].real() - b.data[i].real();
    s0 += 1.0;
    s2 += r2;
    s4 += r2 * r2;
    d0 += diff;
    d2 += diff * r2;
  }
  const double det = s0 * s4 - s2 * s2;
  const double c0 = (s4 * d0 - s2 * d2) / det;
  const double c2 = (s0 * d2 - s2 * d0) / det;
  double scale = 0.0, maxdiff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto x = g.point(i);
    const double r2 = x[0] * x[0] + x[1] * x[1];
    scale = std::max(scale, std::abs(a.data[i].real()));
    if (r2 > rsup * rsup) continue;
    const double resid = a.data[i].real() - b.data[i].real() - c0 - c2 * r2;
    maxdiff = std::max(maxdiff, std::abs(resid));
  }
  CHECK(maxdiff / scale < 1e-4);
}

TEST_CASE("hartree energy: zero field, dilation scaling, profile rescaling", "[riesz]") {
  auto g = GridSpec::make(2, 128, 8.0);
  const double theta = 1.0, p = 2.0;
  auto op = RieszOperator::build(g, theta, RieszMode::FreeSpace);
  CHECK(op.hartree_energy(ScalarField::zeros(g), p) == 0.0);

  // D(u_tau) = tau^(Np - theta - N) D(u) for u_tau = tau^(N/2) u(tau x),
  // with tau = 2 realized grid-exactly; the identity holds to quadrature
  // accuracy (the dilated field lives at half resolution)
  auto u = make_gaussian(g, {0.0, 0.0, 0.0}, 1.6);
  const int N = g.dim;
  const double tau = 2.0;
  ScalarField ut = ScalarField::zeros(g, PayloadKind::Real);
  for (std::size_t i = 0; i < u.size(); ++i) {
    auto c = g.unravel(i);
    std::array<int, 3> src{0, 0, 0};
    bool inside = true;
    for (int d = 0; d < N; ++d) {
      const int j = 2 * c[d] - g.n / 2;
      if (j < 0 || j >= g.n) inside = false;
      src[d] = j;
    }
    ut.data[i] = inside ? std::pow(tau, N / 2.0) * u.data[g.ravel(src)] : 0.0;
  }
  const double Du = op.hartree_energy(u, p);
  const double Dut = op.hartree_energy(ut, p);
  CHECK(Dut == Catch::Approx(std::pow(tau, N * p - theta - N) * Du).epsilon(1e-5));

  // profile rescaling U_eps = eps^-gamma U(eps^-beta x):
  // D(U_eps) = eps^(beta(N+theta) - 2 p gamma) D(U); same grid-exact dilation
  const double beta = 1.0, gamma = 1.0, epsv = 0.5;
  ScalarField ue = ScalarField::zeros(g, PayloadKind::Real);
  for (std::size_t i = 0; i < u.size(); ++i) {
    auto c = g.unravel(i);
    std::array<int, 3> src{0, 0, 0};
    bool inside = true;
    for (int d = 0; d < N; ++d) {
      const int j = 2 * c[d] - g.n / 2;
      if (j < 0 || j >= g.n) inside = false;
      src[d] = j;
    }
    ue.data[i] = inside ? std::pow(epsv, -gamma) * u.data[g.ravel(src)] : 0.0;
  }
  const double Due = op.hartree_energy(ue, p);
  const double expo = beta * (N + theta) - 2.0 * p * gamma;
  CHECK(Due == Catch::Approx(std::pow(epsv, expo) * Du).epsilon(1e-5));
}

TEST_CASE("nonlocal term basics", "[riesz]") {
  auto g = GridSpec::make(2, 32, 6.0);
  const double theta = 1.0, p = 2.0;
  auto op = RieszOperator::build(g, theta, RieszMode::FreeSpace);
  CHECK(linf_norm(op.nonlocal_term(ScalarField::zeros(g), p)) == 0.0);

  auto u = make_gaussian(g, {0.5, 0.25, 0.0}, 0.8);
  auto nl = op.nonlocal_term(u, p);
  // pairing identity <NL(u), u> = D(u)
  CHECK(inner_real(nl, u) == Catch::Approx(op.hartree_energy(u, p)).epsilon(1e-12));
  // sign: u >= 0 -> output >= 0
  for (auto& z : nl.data) CHECK(z.real() >= -1e-12);

  // p < 2: |u|^(p-2) u extended by zero where u vanishes
  ScalarField uz = u;
  uz.data[0] = 0.0;
  auto nl2 = op.nonlocal_term(uz, 1.8);
  CHECK(std::isfinite(nl2.data[0].real()));
  CHECK(nl2.data[0].real() == 0.0);
}

TEST_CASE("hls ratio invariances", "[riesz]") {
  auto g = GridSpec::make(2, 256, 10.0);
  const double theta = 1.0, p = 2.0;
  auto op = RieszOperator::build(g, theta, RieszMode::FreeSpace);
  auto u = make_gaussian(g, {0.0, 0.0, 0.0}, 2.0);
  const double r0 = op.hls_ratio(u, p);
  CHECK(std::isfinite(r0));
  CHECK(r0 > 0.0);

  // amplitude scaling invariance
  ScalarField cu = u;
  for (auto& z : cu.data) z *= 3.7;
  CHECK(op.hls_ratio(cu, p) == Catch::Approx(r0).epsilon(1e-10));

  // dilation invariance (tau = 2 grid-exact)
  ScalarField ut = ScalarField::zeros(g, PayloadKind::Real);
  for (std::size_t i = 0; i < u.size(); ++i) {
    auto c = g.unravel(i);
    std::array<int, 3> src{0, 0, 0};
    bool inside = true;
    for (int d = 0; d < g.dim; ++d) {
      const int j = 2 * c[d] - g.n / 2;
      if (j < 0 || j >= g.n) inside = false;
      src[d] = j;
    }
    ut.data[i] = inside ? 2.0 * u.data[g.ravel(src)] : 0.0;  // tau^(N/2) = 2
  }
  CHECK(op.hls_ratio(ut, p) == Catch::Approx(r0).epsilon(1e-6));

  CHECK_THROWS(op.hls_ratio(ScalarField::zeros(g), p));
}
