#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "choquard/field.hpp"
#include "choquard/grid.hpp"

namespace choquard {

enum class PotentialKind { Zero, Harmonic, QuarticAnharmonic, PowerLaw };

/// External potential with closed-form gradient.  Tabulated potentials are
/// deliberately unsupported: grad V enters the force integral and must be
/// noise-free.
struct PotentialSpec {
  PotentialKind kind = PotentialKind::Harmonic;
  double c2 = 1.0;     // harmonic / quartic: coefficient of |x|^2
  double c4 = 0.0;     // quartic: coefficient of |x|^4
  double cpl = 1.0;    // power law: coefficient of |x|^s
  double s = 1.0;      // power law exponent
  // growth certificate data
  double a = 2.0;      // growth exponent, > 1
  double b = 0.75;     // gradient exponent, in (0,1)
  double R1 = 4.0;     // threshold radius, > 1
  bool exempt_growth = false;  // free-soliton runs opt out of (V2) in checks

  static PotentialSpec zero() {
    PotentialSpec v;
    v.kind = PotentialKind::Zero;
    v.exempt_growth = true;
    return v;
  }
  static PotentialSpec harmonic(double c2 = 1.0) {
    PotentialSpec v;
    v.kind = PotentialKind::Harmonic;
    v.c2 = c2;
    v.a = 2.0;
    v.b = 0.75;
    v.R1 = 4.0;
    return v;
  }
  static PotentialSpec quartic(double c2 = 1.0, double c4 = 0.1) {
    PotentialSpec v;
    v.kind = PotentialKind::QuarticAnharmonic;
    v.c2 = c2;
    v.c4 = c4;
    v.a = 2.0;
    v.b = 0.8;
    v.R1 = 120.0;  // |grad V| <= V^0.8 only takes over at large radius
    return v;
  }
  static PotentialSpec power_law(double c = 1.0, double s = 1.0) {
    PotentialSpec v;
    v.kind = PotentialKind::PowerLaw;
    v.cpl = c;
    v.s = s;
    return v;
  }
};

inline double potential_eval(const PotentialSpec& V, const Vec3& x, int dim) {
  double r2 = 0.0;
  for (int d = 0; d < dim; ++d) r2 += x[d] * x[d];
  switch (V.kind) {
    case PotentialKind::Zero:
      return 0.0;
    case PotentialKind::Harmonic:
      return V.c2 * r2;
    case PotentialKind::QuarticAnharmonic:
      return V.c2 * r2 + V.c4 * r2 * r2;
    case PotentialKind::PowerLaw:
      return V.cpl * std::pow(r2, V.s / 2.0);
  }
  return 0.0;
}

inline Vec3 potential_grad(const PotentialSpec& V, const Vec3& x, int dim) {
  double r2 = 0.0;
  for (int d = 0; d < dim; ++d) r2 += x[d] * x[d];
  Vec3 g{0.0, 0.0, 0.0};
  double radial = 0.0;  // dV/d(r^2) * 2, i.e. grad V = radial * x
  switch (V.kind) {
    case PotentialKind::Zero:
      return g;
    case PotentialKind::Harmonic:
      radial = 2.0 * V.c2;
      break;
    case PotentialKind::QuarticAnharmonic:
      radial = 2.0 * V.c2 + 4.0 * V.c4 * r2;
      break;
    case PotentialKind::PowerLaw:
      radial = r2 > 0.0 ? V.cpl * V.s * std::pow(r2, V.s / 2.0 - 1.0) : 0.0;
      break;
  }
  for (int d = 0; d < dim; ++d) g[d] = radial * x[d];
  return g;
}

/// Sample V and grad V on the grid.
inline std::pair<ScalarField, std::vector<ScalarField>> sample_on_grid(
    const PotentialSpec& V, const GridSpec& grid) {
  ScalarField vf = ScalarField::zeros(grid, PayloadKind::Real);
  std::vector<ScalarField> gf(static_cast<std::size_t>(grid.dim));
  for (int d = 0; d < grid.dim; ++d) gf[d] = ScalarField::zeros(grid, PayloadKind::Real);
  for (std::size_t i = 0; i < grid.npoints(); ++i) {
    const Vec3 x = grid.point(i);
    vf.data[i] = potential_eval(V, x, grid.dim);
    const Vec3 g = potential_grad(V, x, grid.dim);
    for (int d = 0; d < grid.dim; ++d) gf[d].data[i] = g[d];
  }
  return {std::move(vf), std::move(gf)};
}

struct CertAssumption {
  bool passed = true;
  double worst_margin = 0.0;  // min over samples of the defining inequality slack
  Vec3 witness{0.0, 0.0, 0.0};
};

struct CertReport {
  CertAssumption v0;  // V >= 0 in the box
  CertAssumption v1;  // |grad V| <= V^b on shells beyond R1
  CertAssumption v2;  // V >= |x|^a on shells beyond R1
  bool all_passed(bool exempt_growth = false) const {
    return v0.passed && (exempt_growth || (v1.passed && v2.passed));
  }
};

/// Sampling-based certification of the growth assumptions; evidence, not proof.
inline CertReport certify_assumptions(const PotentialSpec& V, int dim, double box_L,
                                      const std::vector<double>& shell_radii,
                                      int sample_count, unsigned long seed = 12345) {
  CertReport rep;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ud(-box_L, box_L);
  auto direction = [&]() {
    Vec3 u{0.0, 0.0, 0.0};
    double norm = 0.0;
    do {
      norm = 0.0;
      for (int d = 0; d < dim; ++d) {
        u[d] = nd(rng);
        norm += u[d] * u[d];
      }
    } while (norm < 1e-12);
    norm = std::sqrt(norm);
    for (int d = 0; d < dim; ++d) u[d] /= norm;
    return u;
  };

  // (V0): box sampling, random plus the axes
  rep.v0.worst_margin = std::numeric_limits<double>::infinity();
  auto check_v0 = [&](const Vec3& x) {
    const double val = potential_eval(V, x, dim);
    if (val < rep.v0.worst_margin) {
      rep.v0.worst_margin = val;
      rep.v0.witness = x;
    }
    if (val < 0.0) rep.v0.passed = false;
  };
  for (int k = 0; k < sample_count; ++k) {
    Vec3 x{0.0, 0.0, 0.0};
    for (int d = 0; d < dim; ++d) x[d] = ud(rng);
    check_v0(x);
  }
  for (int d = 0; d < dim; ++d)
    for (double t = -box_L; t <= box_L; t += box_L / 16.0) {
      Vec3 x{0.0, 0.0, 0.0};
      x[d] = t;
      check_v0(x);
    }

  // (V1), (V2): shell sampling beyond R1
  rep.v1.worst_margin = std::numeric_limits<double>::infinity();
  rep.v2.worst_margin = std::numeric_limits<double>::infinity();
  for (double r : shell_radii) {
    if (!(r > V.R1)) continue;
    for (int k = 0; k < sample_count; ++k) {
      Vec3 u = direction();
      Vec3 x{0.0, 0.0, 0.0};
      for (int d = 0; d < dim; ++d) x[d] = r * u[d];
      const double val = potential_eval(V, x, dim);
      const Vec3 gv = potential_grad(V, x, dim);
      double gn = 0.0;
      for (int d = 0; d < dim; ++d) gn += gv[d] * gv[d];
      gn = std::sqrt(gn);
      // roundoff floor: |x| = r only up to the direction normalization
      const double fuzz = 1e-9 * (1.0 + std::abs(val));
      const double m1 = std::pow(std::max(val, 0.0), V.b) - gn;
      if (m1 < rep.v1.worst_margin) {
        rep.v1.worst_margin = m1;
        rep.v1.witness = x;
      }
      if (m1 < -fuzz) rep.v1.passed = false;
      const double m2 = val - std::pow(r, V.a);
      if (m2 < rep.v2.worst_margin) {
        rep.v2.worst_margin = m2;
        rep.v2.witness = x;
      }
      if (m2 < -fuzz) rep.v2.passed = false;
    }
  }
  return rep;
}

}  // namespace choquard
