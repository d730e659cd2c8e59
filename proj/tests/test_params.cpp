#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "choquard/params.hpp"

using namespace choquard;

TEST_CASE("physical-case parameters validate", "[params]") {
  ModelParams mp;  // N=3, theta=2, p=2, gamma=3, alpha=9, beta=2
  auto r = validate(mp);
  CAPTURE(r.violations);
  CHECK(r.ok());
}

TEST_CASE("beta = 1 rescaling is rejected", "[params]") {
  // gamma = 0, alpha = 2 gives beta = (2+2-0)/4 = 1
  ModelParams mp;
  mp.gamma = 0.0;
  mp.alpha = 2.0;
  mp.beta = 1.0;
  auto r = validate(mp);
  CHECK_FALSE(r.ok());
  CHECK(r.has("beta>1"));
}

TEST_CASE("p outside the admissible interval is rejected", "[params]") {
  ModelParams mp;
  mp.p = 3.0;  // 3 not in (5/3, 7/3)
  auto r = validate(mp);
  CHECK_FALSE(r.ok());
  CHECK(r.has("p-range"));
}

TEST_CASE("solve_line reproduces the physical-case line", "[params]") {
  auto [alpha, beta] = solve_line(3, 2.0, 3.0);
  CHECK(alpha == Catch::Approx(9.0).margin(1e-14));
  CHECK(beta == Catch::Approx(2.0).margin(1e-14));

  auto [a2, b2] = solve_line(3, 2.0, 3.3);
  CHECK(a2 == Catch::Approx(10.1).margin(1e-12));
  CHECK(b2 == Catch::Approx(2.2).margin(1e-12));

  CHECK_THROWS_WITH(solve_line(3, 2.0, 1.5),
                    Catch::Matchers::ContainsSubstring("beta would be <= 1"));
}

TEST_CASE("solve_line output always validates and sits on 3a+6-11g=0", "[params]") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> gdist(1.5 + 1e-6, 6.0);
  for (int k = 0; k < 50; ++k) {
    const double g = gdist(rng);
    auto [alpha, beta] = solve_line(3, 2.0, g);
    CHECK(std::abs(3.0 * alpha + 6.0 - 11.0 * g) < 1e-12 * (1.0 + std::abs(11.0 * g)));
    ModelParams mp = make_params(3, 2.0, 2.0, g, 0.5, 1.0, 1.0);
    CHECK(validate(mp).ok());
    (void)beta;
  }
}

TEST_CASE("omega_eps and kappa", "[params]") {
  ModelParams mp = make_params(3, 2.0, 2.0, 3.0, 0.5, 1.0, 1.0);
  CHECK(omega_eps(mp) == Catch::Approx(4.0).margin(1e-14));  // 0.5^(2-4) = 4
  CHECK(kappa(mp) == Catch::Approx(1.0).margin(1e-14));      // exponent 9-9 = 0

  mp.eps = 1.0;
  CHECK(omega_eps(mp) == Catch::Approx(mp.omega).margin(1e-15));
  CHECK(kappa(mp) == Catch::Approx(1.0).margin(1e-15));

  // beta = 1: omega_eps = omega for every eps (raw construction, invalid set)
  ModelParams flat;
  flat.beta = 1.0;
  flat.eps = 0.37;
  CHECK(omega_eps(flat) == Catch::Approx(flat.omega).margin(1e-15));
}

TEST_CASE("scaling report identities", "[params]") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> gdist(1.51, 5.0);
  for (int k = 0; k < 20; ++k) {
    ModelParams mp = make_params(3, 2.0, 2.0, gdist(rng), 0.7, 1.3, 1.0);
    auto r = scaling_report(mp);
    CHECK(std::abs(r.charge_exponent) < 1e-12);
    CHECK(std::abs(r.J_exponent - r.J_exponent_reduced) < 1e-12);
    CHECK(r.J_exponent_reduced == Catch::Approx(2.0 * (1.0 - mp.beta)).margin(1e-14));
  }
}

TEST_CASE("gce coefficients", "[params]") {
  ModelParams mp = make_params(3, 2.0, 2.0, 3.0, 0.5, 1.0, 1.0);
  auto c = gce_coefficients(mp);
  CHECK(c.data_amplitude_exponent == Catch::Approx(-3.0).margin(1e-14));
  CHECK(c.transform_amplitude == Catch::Approx(1.0).margin(1e-14));  // eps^((9-9)/2)
  CHECK(c.space_scale == Catch::Approx(1.0).margin(1e-15));

  mp.m = 4.0;
  auto c2 = gce_coefficients(mp);
  // m^(-theta/(4(p-1))) = 4^(-1/2) = 1/2
  CHECK(c2.transform_amplitude == Catch::Approx(0.5).margin(1e-14));
  CHECK(c2.space_scale == Catch::Approx(0.5).margin(1e-15));

  ModelParams bad = mp;
  bad.p = 1.0;
  CHECK_THROWS(gce_coefficients(bad));
}
