#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "choquard/potential.hpp"

using namespace choquard;

TEST_CASE("closed-form values and gradients", "[potential]") {
  auto zero = PotentialSpec::zero();
  CHECK(potential_eval(zero, {1.0, 2.0, 3.0}, 3) == 0.0);
  CHECK(potential_grad(zero, {1.0, 2.0, 3.0}, 3)[0] == 0.0);

  auto harm = PotentialSpec::harmonic();
  CHECK(potential_eval(harm, {1.0, 2.0, 2.0}, 3) == Catch::Approx(9.0));
  auto gh = potential_grad(harm, {1.0, 2.0, 2.0}, 3);
  CHECK(gh[0] == Catch::Approx(2.0));
  CHECK(gh[1] == Catch::Approx(4.0));

  auto quart = PotentialSpec::quartic(1.0, 0.1);
  CHECK(potential_eval(quart, {1.0, 0.0, 0.0}, 3) == Catch::Approx(1.1));
  auto gq = potential_grad(quart, {1.0, 0.0, 0.0}, 3);
  CHECK(gq[0] == Catch::Approx(2.4));
  CHECK(gq[1] == 0.0);
  CHECK(gq[2] == 0.0);
}

TEST_CASE("grad matches finite differences at random points", "[potential]") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ud(-4.0, 4.0);
  const double h = 1e-6;
  for (auto V : {PotentialSpec::harmonic(0.7), PotentialSpec::quartic(1.0, 0.1),
                 PotentialSpec::power_law(2.0, 3.0)}) {
    for (int k = 0; k < 100; ++k) {
      Vec3 x{ud(rng), ud(rng), ud(rng)};
      auto g = potential_grad(V, x, 3);
      for (int d = 0; d < 3; ++d) {
        Vec3 xp = x, xm = x;
        xp[d] += h;
        xm[d] -= h;
        const double fd =
            (potential_eval(V, xp, 3) - potential_eval(V, xm, 3)) / (2.0 * h);
        CHECK(g[d] == Catch::Approx(fd).margin(1e-6 * (1.0 + std::abs(fd))));
      }
    }
  }
}

TEST_CASE("sample on grid", "[potential]") {
  auto g = GridSpec::make(2, 16, 3.0);
  auto [vf, gf] = sample_on_grid(PotentialSpec::harmonic(), g);
  REQUIRE(gf.size() == 2);
  for (std::size_t i = 0; i < g.npoints(); ++i) {
    auto x = g.point(i);
    CHECK(vf.data[i].real() == Catch::Approx(x[0] * x[0] + x[1] * x[1]));
    CHECK(gf[0].data[i].real() == Catch::Approx(2.0 * x[0]));
  }
}

TEST_CASE("harmonic certifies with b=3/4 beyond R1=4", "[potential]") {
  auto V = PotentialSpec::harmonic();  // a=2, b=3/4, R1=4
  auto rep = certify_assumptions(V, 3, 8.0, {4.5, 6.0, 10.0, 50.0}, 400);
  CHECK(rep.v0.passed);
  CHECK(rep.v1.passed);
  CHECK(rep.v2.passed);
  CHECK(rep.all_passed());
}

TEST_CASE("V = |x| fails the growth assumption for every a > 1", "[potential]") {
  auto V = PotentialSpec::power_law(1.0, 1.0);
  V.a = 1.5;
  V.b = 0.5;
  V.R1 = 2.0;
  auto rep = certify_assumptions(V, 3, 8.0, {4.0, 16.0, 64.0}, 200);
  CHECK(rep.v0.passed);
  CHECK_FALSE(rep.v2.passed);  // r >= r^1.5 fails beyond r = 1
  CHECK(rep.v2.worst_margin < 0.0);
}

TEST_CASE("zero potential: V0 passes, V2 fails, exemption flag", "[potential]") {
  auto V = PotentialSpec::zero();
  auto rep = certify_assumptions(V, 2, 8.0, {4.0, 8.0}, 100);
  CHECK(rep.v0.passed);
  CHECK_FALSE(rep.v2.passed);
  CHECK(rep.all_passed(/*exempt_growth=*/true));
  CHECK_FALSE(rep.all_passed(false));
}

TEST_CASE("certification is monotone in R1 on the harmonic family", "[potential]") {
  // certified at R1 implies certified at any larger threshold: shells beyond
  // the larger R1 are a subset of those beyond the smaller one
  for (double R1 : {4.0, 5.0, 8.0, 12.0}) {
    auto V = PotentialSpec::harmonic();
    V.R1 = R1;
    std::vector<double> shells;
    for (double r = R1 * 1.1; r < 100.0; r *= 1.7) shells.push_back(r);
    auto rep = certify_assumptions(V, 3, 8.0, shells, 200);
    CAPTURE(R1);
    CHECK(rep.all_passed());
  }
}

TEST_CASE("quartic preset certifies beyond its large R1", "[potential]") {
  auto V = PotentialSpec::quartic(1.0, 0.1);  // b=0.8 takes over near r ~ 103
  auto rep = certify_assumptions(V, 2, 4.0, {125.0, 200.0, 500.0}, 300);
  CHECK(rep.all_passed());
}
