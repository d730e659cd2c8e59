#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

#include "choquard/fft.hpp"
#include "choquard/grid.hpp"

namespace choquard {

enum class PayloadKind { Real, Complex };

/// Scalar field sampled on a periodic grid, row-major.  A Real-tagged field
/// keeps identically zero imaginary parts.
struct ScalarField {
  GridSpec grid;
  PayloadKind kind = PayloadKind::Real;
  std::vector<std::complex<double>> data;

  static ScalarField zeros(const GridSpec& g, PayloadKind k = PayloadKind::Real) {
    ScalarField f;
    f.grid = g;
    f.kind = k;
    f.data.assign(g.npoints(), std::complex<double>(0.0, 0.0));
    return f;
  }

  bool is_real() const { return kind == PayloadKind::Real; }
  std::size_t size() const { return data.size(); }
  std::complex<double>& operator[](std::size_t i) { return data[i]; }
  const std::complex<double>& operator[](std::size_t i) const { return data[i]; }
};

inline ScalarField make_gaussian(const GridSpec& g, const Vec3& center,
                                 double width, double amplitude = 1.0) {
  ScalarField f = ScalarField::zeros(g, PayloadKind::Real);
  const std::size_t M = g.npoints();
  for (std::size_t i = 0; i < M; ++i) {
    const Vec3 x = g.point(i);
    double r2 = 0.0;
    for (int d = 0; d < g.dim; ++d) {
      const double dd = x[d] - center[d];
      r2 += dd * dd;
    }
    f.data[i] = amplitude * std::exp(-r2 / (2.0 * width * width));
  }
  return f;
}

/// Smooth random real field from a few low Fourier modes; deterministic in seed.
inline ScalarField make_random_smooth(const GridSpec& g, unsigned long seed,
                                      int max_mode = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::uniform_real_distribution<double> phs(0.0, 2.0 * std::numbers::pi);
  struct Mode {
    std::array<int, 3> k;
    double a, ph;
  };
  std::vector<Mode> modes;
  const int nm = 8;
  std::uniform_int_distribution<int> ki(-max_mode, max_mode);
  for (int j = 0; j < nm; ++j) {
    Mode m;
    for (int d = 0; d < 3; ++d) m.k[d] = (d < g.dim) ? ki(rng) : 0;
    m.a = amp(rng);
    m.ph = phs(rng);
    modes.push_back(m);
  }
  ScalarField f = ScalarField::zeros(g, PayloadKind::Real);
  const double w = std::numbers::pi / g.L;
  for (std::size_t i = 0; i < g.npoints(); ++i) {
    const Vec3 x = g.point(i);
    double val = 0.0;
    for (const auto& m : modes) {
      double ph = m.ph;
      for (int d = 0; d < g.dim; ++d) ph += w * m.k[d] * x[d];
      val += m.a * std::cos(ph);
    }
    f.data[i] = val;
  }
  return f;
}

// ---- integrals and observables ------------------------------------------

/// Hylenic charge: grid quadrature of |f|^2 (Riemann sum, spectrally
/// accurate on the periodic grid).
inline double charge(const ScalarField& f) {
  double s = 0.0;
  for (const auto& z : f.data) s += std::norm(z);
  return s * f.grid.cell_volume();
}

inline double linf_norm(const ScalarField& f) {
  double m = 0.0;
  for (const auto& z : f.data) m = std::max(m, std::abs(z));
  return m;
}

inline double inner_real(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("inner: grid mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a.data[i].real() * b.data[i].real();
  return s * a.grid.cell_volume();
}

inline std::complex<double> inner(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("inner: grid mismatch");
  std::complex<double> s(0.0, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    s += std::conj(a.data[i]) * b.data[i];
  return s * a.grid.cell_volume();
}

/// Charge-normalized first moment in box-chart coordinates [-L, L).
inline Vec3 barycenter(const ScalarField& f) {
  const double C = charge(f);
  if (!(C > 0.0)) throw std::invalid_argument("barycenter: zero-charge field");
  Vec3 q{0.0, 0.0, 0.0};
  const GridSpec& g = f.grid;
  std::array<int, 3> c{0, 0, 0};
  std::size_t i = 0;
  // explicit index walk avoids unravel cost per node
  const int n = g.n;
  const int n1 = g.dim >= 2 ? n : 1;
  const int n2 = g.dim >= 3 ? n : 1;
  for (int i0 = 0; i0 < n; ++i0)
    for (int i1 = 0; i1 < n1; ++i1)
      for (int i2 = 0; i2 < n2; ++i2, ++i) {
        const double w = std::norm(f.data[i]);
        q[0] += w * g.coord(i0);
        if (g.dim >= 2) q[1] += w * g.coord(i1);
        if (g.dim >= 3) q[2] += w * g.coord(i2);
      }
  (void)c;
  const double scale = g.cell_volume() / C;
  for (int d = 0; d < 3; ++d) q[d] *= scale;
  return q;
}

/// Charge fraction strictly outside the periodic-metric ball of given radius.
inline double mass_outside_ball(const ScalarField& f, const Vec3& center,
                                double radius) {
  if (!(radius >= 0.0)) throw std::invalid_argument("mass_outside_ball: radius < 0");
  const double C = charge(f);
  if (!(C > 0.0)) throw std::invalid_argument("mass_outside_ball: zero-charge field");
  const GridSpec& g = f.grid;
  const double r2 = radius * radius;
  double s = 0.0;
  const int n = g.n;
  const int n1 = g.dim >= 2 ? n : 1;
  const int n2 = g.dim >= 3 ? n : 1;
  std::size_t i = 0;
  for (int i0 = 0; i0 < n; ++i0) {
    const double d0 = g.periodic_delta(g.coord(i0), center[0]);
    for (int i1 = 0; i1 < n1; ++i1) {
      const double d1 = g.dim >= 2 ? g.periodic_delta(g.coord(i1), center[1]) : 0.0;
      for (int i2 = 0; i2 < n2; ++i2, ++i) {
        const double d2 = g.dim >= 3 ? g.periodic_delta(g.coord(i2), center[2]) : 0.0;
        const double dist2 = d0 * d0 + d1 * d1 + d2 * d2;
        if (dist2 > r2) s += std::norm(f.data[i]);
      }
    }
  }
  return s * g.cell_volume() / C;
}

// ---- spectral calculus ----------------------------------------------------

/// Unitary forward transform: Parseval holds exactly in the grid L2 norm.
inline ScalarField fft(const ScalarField& f) {
  std::lock_guard<std::mutex> lk(detail::field_op_mutex());
  auto& ct = detail::cached_complex_transform(f.grid);
  std::copy(f.data.begin(), f.data.end(), ct.data());
  ct.forward();
  ScalarField out = ScalarField::zeros(f.grid, PayloadKind::Complex);
  const double scale = 1.0 / std::sqrt(static_cast<double>(ct.size()));
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = ct.data()[i] * scale;
  return out;
}

inline ScalarField ifft(const ScalarField& f) {
  std::lock_guard<std::mutex> lk(detail::field_op_mutex());
  auto& ct = detail::cached_complex_transform(f.grid);
  std::copy(f.data.begin(), f.data.end(), ct.data());
  ct.backward();
  ScalarField out = ScalarField::zeros(f.grid, PayloadKind::Complex);
  const double scale = 1.0 / std::sqrt(static_cast<double>(ct.size()));
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = ct.data()[i] * scale;
  return out;
}

namespace detail {

// Apply a per-mode multiplier built from the wavenumbers; `which` selects the
// derivative: -1 = Laplacian (-|k|^2), d >= 0 = i*k_d with the odd Nyquist
// mode zeroed.
inline void spectral_derivative(const ScalarField& f, int which, ScalarField& out) {
  std::lock_guard<std::mutex> lk(field_op_mutex());
  auto& ct = cached_complex_transform(f.grid);
  std::copy(f.data.begin(), f.data.end(), ct.data());
  ct.forward();
  const GridSpec& g = f.grid;
  const int n = g.n;
  const int n1 = g.dim >= 2 ? n : 1;
  const int n2 = g.dim >= 3 ? n : 1;
  std::size_t i = 0;
  for (int i0 = 0; i0 < n; ++i0) {
    const double k0 = g.wavenumber(i0);
    for (int i1 = 0; i1 < n1; ++i1) {
      const double k1 = g.dim >= 2 ? g.wavenumber(i1) : 0.0;
      for (int i2 = 0; i2 < n2; ++i2, ++i) {
        const double k2 = g.dim >= 3 ? g.wavenumber(i2) : 0.0;
        if (which < 0) {
          const double k2sum = k0 * k0 + k1 * k1 + k2 * k2;
          ct.data()[i] *= -k2sum;
        } else {
          const int idx = which == 0 ? i0 : (which == 1 ? i1 : i2);
          double kd = which == 0 ? k0 : (which == 1 ? k1 : k2);
          if (idx == n / 2) kd = 0.0;  // odd derivative: drop the Nyquist mode
          ct.data()[i] *= std::complex<double>(0.0, kd);
        }
      }
    }
  }
  ct.backward();
  const double scale = 1.0 / static_cast<double>(ct.size());
  out = ScalarField::zeros(g, f.kind);
  if (f.is_real()) {
    for (std::size_t j = 0; j < out.size(); ++j)
      out.data[j] = ct.data()[j].real() * scale;
  } else {
    for (std::size_t j = 0; j < out.size(); ++j) out.data[j] = ct.data()[j] * scale;
  }
}

}  // namespace detail

inline std::vector<ScalarField> gradient(const ScalarField& f) {
  std::vector<ScalarField> g(static_cast<std::size_t>(f.grid.dim));
  for (int d = 0; d < f.grid.dim; ++d) detail::spectral_derivative(f, d, g[d]);
  return g;
}

inline ScalarField laplacian(const ScalarField& f) {
  ScalarField out;
  detail::spectral_derivative(f, -1, out);
  return out;
}

/// Squared L2 norm of the spectral gradient, via Parseval (single forward
/// transform, no inverse).
inline double grad_norm_sq(const ScalarField& f) {
  std::lock_guard<std::mutex> lk(detail::field_op_mutex());
  auto& ct = detail::cached_complex_transform(f.grid);
  std::copy(f.data.begin(), f.data.end(), ct.data());
  ct.forward();
  const GridSpec& g = f.grid;
  const int n = g.n;
  const int n1 = g.dim >= 2 ? n : 1;
  const int n2 = g.dim >= 3 ? n : 1;
  double s = 0.0;
  std::size_t i = 0;
  for (int i0 = 0; i0 < n; ++i0) {
    const double k0 = g.wavenumber(i0);
    for (int i1 = 0; i1 < n1; ++i1) {
      const double k1 = g.dim >= 2 ? g.wavenumber(i1) : 0.0;
      for (int i2 = 0; i2 < n2; ++i2, ++i) {
        const double k2 = g.dim >= 3 ? g.wavenumber(i2) : 0.0;
        s += (k0 * k0 + k1 * k1 + k2 * k2) * std::norm(ct.data()[i]);
      }
    }
  }
  return s * g.cell_volume() / static_cast<double>(ct.size());
}

/// Integral of the momentum density eps^-(N-1) * Im(conj(psi) grad psi).
inline Vec3 momentum_integral(const ScalarField& psi, double eps) {
  Vec3 P{0.0, 0.0, 0.0};
  auto grads = gradient(psi);
  for (int d = 0; d < psi.grid.dim; ++d) {
    double s = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i)
      s += std::imag(std::conj(psi.data[i]) * grads[d].data[i]);
    P[d] = s * psi.grid.cell_volume();
  }
  const double scale = std::pow(eps, -(psi.grid.dim - 1));
  for (int d = 0; d < 3; ++d) P[d] *= scale;
  return P;
}

/// Modulus field |f| (real).
inline ScalarField modulus(const ScalarField& f) {
  ScalarField out = ScalarField::zeros(f.grid, PayloadKind::Real);
  for (std::size_t i = 0; i < f.size(); ++i) out.data[i] = std::abs(f.data[i]);
  return out;
}

/// Shift by whole grid cells (periodic).
inline ScalarField shift(const ScalarField& f, const std::array<int, 3>& cells) {
  ScalarField out = ScalarField::zeros(f.grid, f.kind);
  const GridSpec& g = f.grid;
  for (std::size_t i = 0; i < f.size(); ++i) {
    auto c = g.unravel(i);
    std::array<int, 3> src{0, 0, 0};
    for (int d = 0; d < g.dim; ++d) src[d] = c[d] - cells[d];
    out.data[i] = f.data[g.ravel(src)];
  }
  return out;
}

inline bool all_finite(const ScalarField& f) {
  for (const auto& z : f.data)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

}  // namespace choquard
