#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace choquard {

// Tolerance for the exponent algebra; the exponents are small rationals in
// practice, so 1e-12 leaves ample headroom in double precision.
inline constexpr double kExponentTol = 1e-12;

/// Scalar parameters of the rescaled problem.  The exponents (alpha, beta,
/// gamma) are tied together by the model's consistency relations; use
/// make_params to derive (alpha, beta) from gamma, or fill all fields
/// directly and run validate() when constructing deliberately broken sets.
struct ModelParams {
  int N = 3;             // spatial dimension
  double theta = 2.0;    // Riesz order, 0 < theta < N
  double p = 2.0;        // nonlinearity power
  double m = 1.0;        // mass
  double omega = 1.0;    // frequency of the stationary profile
  double eps = 1.0;      // semiclassical parameter
  double alpha = 9.0;
  double gamma = 3.0;
  double beta = 2.0;
  std::array<double, 3> v{0.0, 0.0, 0.0};  // initial velocity, first N entries

  // The theory is stated for N >= 3; lower dimensions evaluate fine and are
  // used for fast smoke runs.
  bool theory_regime() const { return N >= 3; }

  double v_norm() const {
    double s = 0.0;
    for (int d = 0; d < N; ++d) s += v[d] * v[d];
    return std::sqrt(s);
  }
};

struct ValidationResult {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
  bool has(std::string_view name) const {
    for (const auto& s : violations)
      if (s.find(name) != std::string::npos) return true;
    return false;
  }
};

// Relation names reported by validate(); kept terse so callers can match.
//   "0<theta<N"  kernel order range
//   "p-range"    p in (1 + theta/N, 1 + (2+theta)/N), strict
//   "beta=(alpha+2-gamma)/(theta+2)"
//   "N*beta-2*gamma=0"
//   "beta>1"
inline ValidationResult validate(const ModelParams& mp) {
  ValidationResult r;
  if (!(mp.N >= 1)) r.violations.push_back("N>=1");
  if (!(mp.theta > 0.0 && mp.theta < static_cast<double>(mp.N)))
    r.violations.push_back("0<theta<N");
  const double plo = 1.0 + mp.theta / mp.N;
  const double phi = 1.0 + (2.0 + mp.theta) / mp.N;
  if (!(mp.p > plo && mp.p < phi)) r.violations.push_back("p-range");
  const double beta_rel = (mp.alpha + 2.0 - mp.gamma) / (mp.theta + 2.0);
  if (!(std::abs(mp.beta - beta_rel) <=
        kExponentTol * std::max(1.0, std::abs(mp.beta))))
    r.violations.push_back("beta=(alpha+2-gamma)/(theta+2)");
  if (!(std::abs(mp.N * mp.beta - 2.0 * mp.gamma) <= kExponentTol))
    r.violations.push_back("N*beta-2*gamma=0");
  if (!(mp.beta > 1.0)) r.violations.push_back("beta>1");
  if (!(mp.m > 0.0)) r.violations.push_back("m>0");
  if (!(mp.omega > 0.0)) r.violations.push_back("omega>0");
  if (!(mp.eps > 0.0)) r.violations.push_back("eps>0");
  return r;
}

/// Solve the consistency relations for (alpha, beta) given gamma.  Charge
/// normalization gives beta = 2*gamma/N, the fundamental relation then fixes
/// alpha = beta*(theta+2) - 2 + gamma.  Requires gamma > N/2 (else beta <= 1).
inline std::pair<double, double> solve_line(int N, double theta, double gamma) {
  if (!(theta > 0.0 && theta < static_cast<double>(N)))
    throw std::invalid_argument("solve_line: need 0 < theta < N");
  const double beta = 2.0 * gamma / N;
  if (!(beta > 1.0))
    throw std::invalid_argument("solve_line: beta would be <= 1 (need gamma > N/2)");
  const double alpha = beta * (theta + 2.0) - 2.0 + gamma;
  return {alpha, beta};
}

/// Checked constructor: derives (alpha, beta) from gamma via solve_line.
inline ModelParams make_params(int N, double theta, double p, double gamma,
                               double eps, double omega, double m,
                               std::array<double, 3> v = {0.0, 0.0, 0.0}) {
  ModelParams mp;
  mp.N = N;
  mp.theta = theta;
  mp.p = p;
  mp.gamma = gamma;
  mp.eps = eps;
  mp.omega = omega;
  mp.m = m;
  mp.v = v;
  auto [alpha, beta] = solve_line(N, theta, gamma);
  mp.alpha = alpha;
  mp.beta = beta;
  auto res = validate(mp);
  if (!res.ok()) {
    std::string msg = "make_params: invalid parameters:";
    for (const auto& s : res.violations) msg += " " + s;
    throw std::invalid_argument(msg);
  }
  return mp;
}

/// Frequency of the rescaled stationary profile, omega_eps = omega * eps^(2-2beta).
inline double omega_eps(const ModelParams& mp) {
  return mp.omega * std::pow(mp.eps, 2.0 - 2.0 * mp.beta);
}

/// Coefficient of the nonlocal term in the rescaled equation,
/// kappa = eps^(gamma*(2p-1) - alpha).
inline double kappa(const ModelParams& mp) {
  return std::pow(mp.eps, mp.gamma * (2.0 * mp.p - 1.0) - mp.alpha);
}

struct ScalingReport {
  double charge_exponent;     // N*beta - 2*gamma
  double J_exponent;          // 2 - 2*gamma + beta*(N-2)
  double J_exponent_reduced;  // 2*(1 - beta)
  double kappa_exponent;      // gamma*(2p-1) - alpha
  double omega_eps;
};

inline ScalingReport scaling_report(const ModelParams& mp) {
  ScalingReport r;
  r.charge_exponent = mp.N * mp.beta - 2.0 * mp.gamma;
  r.J_exponent = 2.0 - 2.0 * mp.gamma + mp.beta * (mp.N - 2.0);
  r.J_exponent_reduced = 2.0 * (1.0 - mp.beta);
  r.kappa_exponent = mp.gamma * (2.0 * mp.p - 1.0) - mp.alpha;
  r.omega_eps = omega_eps(mp);
  return r;
}

struct GceCoefficients {
  double data_amplitude_exponent;  // (gamma - alpha) / (2(p-1)); initial datum amplitude eps^this
  double transform_amplitude;      // m^(-theta/(4(p-1))) * eps^((alpha - gamma(2p-1))/(2(p-1)))
  double space_scale;              // 1/sqrt(m)
};

/// Coefficients of the rescaling between the original equation and the
/// transformed problem, and of the original-variables initial datum.
inline GceCoefficients gce_coefficients(const ModelParams& mp) {
  if (!(mp.p > 1.0))
    throw std::invalid_argument("gce_coefficients: need p > 1");
  if (!(mp.m > 0.0))
    throw std::invalid_argument("gce_coefficients: need m > 0");
  GceCoefficients c;
  c.data_amplitude_exponent = (mp.gamma - mp.alpha) / (2.0 * (mp.p - 1.0));
  c.transform_amplitude =
      std::pow(mp.m, -mp.theta / (4.0 * (mp.p - 1.0))) *
      std::pow(mp.eps, (mp.alpha - mp.gamma * (2.0 * mp.p - 1.0)) /
                           (2.0 * (mp.p - 1.0)));
  c.space_scale = 1.0 / std::sqrt(mp.m);
  return c;
}

}  // namespace choquard
