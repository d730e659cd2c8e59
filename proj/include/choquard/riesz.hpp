#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "choquard/epstein.hpp"
#include "choquard/field.hpp"
#include "choquard/fft.hpp"
#include "choquard/grid.hpp"

namespace choquard {

enum class RieszMode { FreeSpace, Periodic };

/// Applies I_theta * (.) by FFT.
///
/// Free-space mode uses Hockney domain doubling with the kernel sampled in
/// physical space.  The singular lattice site and its 2N neighbors carry
/// corrected-trapezoidal weights built from the Epstein zeta of Z^N, which
/// cancel the h^theta * f(0) and h^(theta+2) * (Lap f)(0) terms of the
/// quadrature error; the remaining error decays like h^(theta+4).
///
/// Periodic mode multiplies by |k|^-theta with the zero mode removed; the
/// result is mean-free, so energies acquire a documented additive constant.
class RieszOperator {
 public:
  static RieszOperator build(const GridSpec& grid, double theta, RieszMode mode) {
    if (!(theta > 0.0 && theta < static_cast<double>(grid.dim)))
      throw std::invalid_argument("riesz: need 0 < theta < dim");
    return RieszOperator(grid, theta, mode);
  }

  static std::shared_ptr<const RieszOperator> build_shared(const GridSpec& grid,
                                                           double theta,
                                                           RieszMode mode) {
    if (!(theta > 0.0 && theta < static_cast<double>(grid.dim)))
      throw std::invalid_argument("riesz: need 0 < theta < dim");
    return std::shared_ptr<const RieszOperator>(new RieszOperator(grid, theta, mode));
  }

  const GridSpec& grid() const { return grid_; }
  double theta() const { return theta_; }
  RieszMode mode() const { return mode_; }
  const std::vector<double>& kernel_spectrum() const { return spectrum_; }

  /// I_theta * f for real nonnegative f (callers pass |u|^p).
  ScalarField convolve(const ScalarField& f) const {
    if (!(f.grid == grid_)) throw std::invalid_argument("riesz: grid mismatch");
    ScalarField out = ScalarField::zeros(grid_, PayloadKind::Real);
    std::vector<double> in(grid_.npoints());
    for (std::size_t i = 0; i < in.size(); ++i) in[i] = f.data[i].real();
    std::vector<double> res(grid_.npoints());
    convolve_raw(in.data(), res.data());
    for (std::size_t i = 0; i < res.size(); ++i) out.data[i] = res[i];
    return out;
  }

  /// Raw-buffer variant used by the hot loops; in/out are n^dim row-major.
  void convolve_raw(const double* in, double* out) const {
    std::lock_guard<std::mutex> lk(scratch_mutex_);
    if (mode_ == RieszMode::FreeSpace)
      convolve_free(in, out);
    else
      convolve_periodic(in, out);
  }

  /// D(u) = int (I_theta * |u|^p) |u|^p.
  double hartree_energy(const ScalarField& u, double p) const {
    std::vector<double> g(grid_.npoints()), conv(grid_.npoints());
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] = std::pow(std::abs(u.data[i]), p);
    convolve_raw(g.data(), conv.data());
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += conv[i] * g[i];
    return s * grid_.cell_volume();
  }

  /// (I_theta * |u|^p) |u|^(p-2) u for real u; |u|^(p-2) u extended by 0 at
  /// u = 0 when p < 2.
  ScalarField nonlocal_term(const ScalarField& u, double p) const {
    if (!(p > 1.0)) throw std::invalid_argument("nonlocal_term: need p > 1");
    std::vector<double> g(grid_.npoints()), conv(grid_.npoints());
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] = std::pow(std::abs(u.data[i]), p);
    convolve_raw(g.data(), conv.data());
    ScalarField out = ScalarField::zeros(grid_, PayloadKind::Real);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double ui = u.data[i].real();
      const double au = std::abs(ui);
      const double mod = (au > 0.0) ? std::pow(au, p - 2.0) * ui : 0.0;
      out.data[i] = conv[i] * mod;
    }
    return out;
  }

  /// Empirical Hardy-Littlewood-Sobolev ratio
  /// D(u) / (||grad u||^(Np-theta-N) ||u||^(2p-Np+N+theta)).
  double hls_ratio(const ScalarField& u, double p) const {
    const int N = grid_.dim;
    const double D = hartree_energy(u, p);
    const double gn = std::sqrt(grad_norm_sq(u));
    const double un = std::sqrt(charge(u));
    if (!(gn > 0.0 && un > 0.0))
      throw std::invalid_argument("hls_ratio: zero norm");
    const double e1 = N * p - theta_ - N;
    const double e2 = 2.0 * p - N * p + N + theta_;
    return D / (std::pow(gn, e1) * std::pow(un, e2));
  }

 private:
  RieszOperator(const GridSpec& grid, double theta, RieszMode mode)
      : grid_(grid), theta_(theta), mode_(mode) {
    if (mode_ == RieszMode::FreeSpace)
      build_free_space();
    else
      build_periodic();
  }

  void build_free_space() {
    const int N = grid_.dim;
    const int P = 2 * grid_.n;
    const double h = grid_.spacing();
    const double c = riesz_normalization(N, theta_);
    std::vector<int> dims(static_cast<std::size_t>(N), P);
    rt_ = std::make_unique<RealTransform>(dims);

    double* K = rt_->real_data();
    const int n1 = N >= 2 ? P : 1;
    const int n2 = N >= 3 ? P : 1;
    auto offset = [P](int i) { return i < P / 2 ? i : i - P; };
    std::size_t idx = 0;
    for (int i0 = 0; i0 < P; ++i0) {
      const double x0 = offset(i0) * h;
      for (int i1 = 0; i1 < n1; ++i1) {
        const double x1 = N >= 2 ? offset(i1) * h : 0.0;
        for (int i2 = 0; i2 < n2; ++i2, ++idx) {
          const double x2 = N >= 3 ? offset(i2) * h : 0.0;
          const double r2 = x0 * x0 + x1 * x1 + x2 * x2;
          K[idx] = r2 > 0.0 ? c * std::pow(std::sqrt(r2), theta_ - N) : 0.0;
        }
      }
    }
    // corrected-trapezoidal weights at the singular site and its neighbors
    const double Z0 = epstein_zeta(N, N - theta_);
    const double Z2 = epstein_zeta(N, N - theta_ - 2.0);
    const double hpow = std::pow(h, theta_ - N);
    const double w_origin = -c * hpow * Z0 + c * hpow * Z2;
    const double w_nb = -c * hpow * Z2 / (2.0 * N);
    std::vector<std::size_t> strides(static_cast<std::size_t>(N));
    strides[N - 1] = 1;
    for (int d = N - 2; d >= 0; --d)
      strides[d] = strides[d + 1] * static_cast<std::size_t>(P);
    K[0] = w_origin;
    for (int d = 0; d < N; ++d) {
      K[strides[d] * 1] += w_nb;                                   // +e_d
      K[strides[d] * static_cast<std::size_t>(P - 1)] += w_nb;     // -e_d
    }

    rt_->forward();
    spectrum_.resize(rt_->complex_size());
    const std::complex<double>* Khat = rt_->complex_data();
    for (std::size_t i = 0; i < spectrum_.size(); ++i)
      spectrum_[i] = std::max(0.0, Khat[i].real());  // symmetric kernel: imag is roundoff
  }

  void build_periodic() {
    const int N = grid_.dim;
    const int n = grid_.n;
    std::vector<int> dims(static_cast<std::size_t>(N), n);
    rt_ = std::make_unique<RealTransform>(dims);
    spectrum_.resize(rt_->complex_size());
    const int nlast = n / 2 + 1;  // halved last axis of the r2c layout
    const int m0 = N >= 2 ? n : 1;
    const int m1 = N >= 3 ? n : 1;
    auto mult = [this](double k2) {
      return k2 > 0.0 ? std::pow(k2, -theta_ / 2.0) : 0.0;  // zero mode removed
    };
    std::size_t idx = 0;
    for (int i0 = 0; i0 < m0; ++i0) {
      const double k0 = N >= 2 ? grid_.wavenumber(i0) : 0.0;
      for (int i1 = 0; i1 < m1; ++i1) {
        const double k1 = N >= 3 ? grid_.wavenumber(i1) : 0.0;
        for (int il = 0; il < nlast; ++il, ++idx) {
          const double kl = grid_.wavenumber(il);
          spectrum_[idx] = mult(k0 * k0 + k1 * k1 + kl * kl);
        }
      }
    }
  }

  void convolve_free(const double* in, double* out) const {
    const int N = grid_.dim;
    const int n = grid_.n;
    const int P = 2 * n;
    double* rb = rt_->real_data();
    std::fill(rb, rb + rt_->real_size(), 0.0);
    // embed the n-grid block at offsets [0, n) per axis
    const int n1 = N >= 2 ? n : 1;
    const int n2 = N >= 3 ? n : 1;
    std::size_t src = 0;
    for (int i0 = 0; i0 < n; ++i0)
      for (int i1 = 0; i1 < n1; ++i1)
        for (int i2 = 0; i2 < n2; ++i2, ++src) {
          std::size_t dst = static_cast<std::size_t>(i0);
          if (N >= 2) dst = dst * P + i1;
          if (N >= 3) dst = dst * P + i2;
          rb[dst] = in[src];
        }
    rt_->forward();
    std::complex<double>* cb = rt_->complex_data();
    const double scale =
        grid_.cell_volume() / static_cast<double>(rt_->logical_size());
    for (std::size_t i = 0; i < spectrum_.size(); ++i) cb[i] *= spectrum_[i] * scale;
    rt_->backward();
    std::size_t dst = 0;
    for (int i0 = 0; i0 < n; ++i0)
      for (int i1 = 0; i1 < n1; ++i1)
        for (int i2 = 0; i2 < n2; ++i2, ++dst) {
          std::size_t s = static_cast<std::size_t>(i0);
          if (N >= 2) s = s * P + i1;
          if (N >= 3) s = s * P + i2;
          out[dst] = rb[s];
        }
  }

  void convolve_periodic(const double* in, double* out) const {
    double* rb = rt_->real_data();
    std::copy(in, in + rt_->real_size(), rb);
    rt_->forward();
    std::complex<double>* cb = rt_->complex_data();
    const double scale = 1.0 / static_cast<double>(rt_->logical_size());
    for (std::size_t i = 0; i < spectrum_.size(); ++i) cb[i] *= spectrum_[i] * scale;
    rt_->backward();
    std::copy(rb, rb + rt_->real_size(), out);
  }

  GridSpec grid_;
  double theta_;
  RieszMode mode_;
  std::vector<double> spectrum_;
  mutable std::mutex scratch_mutex_;
  mutable std::unique_ptr<RealTransform> rt_;
};

}  // namespace choquard
