#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace choquard {

/// Normalization constant of the Riesz kernel,
/// I_theta(x) = riesz_normalization(N, theta) * |x|^(theta - N).
inline double riesz_normalization(int N, double theta) {
  const double pi = std::numbers::pi;
  return std::tgamma((N - theta) / 2.0) /
         (std::tgamma(theta / 2.0) * std::pow(pi, N / 2.0) * std::pow(2.0, theta));
}

namespace detail {

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const double pi = std::numbers::pi;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

inline double theta3_minus1(double t) {
  // sum_{m>=1} 2 exp(-pi t m^2), t >= 1 converges in a handful of terms
  const double pi = std::numbers::pi;
  double s = 0.0;
  for (int m = 1; m < 64; ++m) {
    const double term = 2.0 * std::exp(-pi * t * m * m);
    s += term;
    if (term < 1e-22) break;
  }
  return s;
}

}  // namespace detail

/// Epstein zeta of the integer lattice, Z_N(s) = sum'_{j in Z^N} |j|^-s,
/// analytically continued via the incomplete theta representation
///   pi^(-s/2) Gamma(s/2) Z_N(s)
///     = 2/(s-N) - 2/s + int_1^inf (t^(s/2-1) + t^((N-s)/2-1)) (Theta(t)-1) dt.
/// Valid for all s except the pole at s = N; Z_N(0) = -1.
inline double epstein_zeta(int N, double s) {
  if (N < 1) throw std::invalid_argument("epstein_zeta: N >= 1");
  if (std::abs(s - N) < 1e-12) throw std::invalid_argument("epstein_zeta: pole at s = N");
  if (std::abs(s) < 1e-12) return -1.0;
  static thread_local std::vector<double> gx, gw;
  if (gx.empty()) detail::gauss_legendre(96, gx, gw);
  const double a = 1.0, b = 24.0;  // Theta(t)-1 ~ 2N e^{-pi t}: machine zero by t ~ 16
  double I = 0.0;
  for (std::size_t i = 0; i < gx.size(); ++i) {
    const double t = 0.5 * (b - a) * gx[i] + 0.5 * (a + b);
    const double wt = 0.5 * (b - a) * gw[i];
    const double th = std::pow(1.0 + detail::theta3_minus1(t), N) - 1.0;
    I += wt * (std::pow(t, s / 2.0 - 1.0) + std::pow(t, (N - s) / 2.0 - 1.0)) * th;
  }
  const double lam = 2.0 / (s - N) - 2.0 / s + I;
  return std::pow(std::numbers::pi, s / 2.0) / std::tgamma(s / 2.0) * lam;
}

}  // namespace choquard
