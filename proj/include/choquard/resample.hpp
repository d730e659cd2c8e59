#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "choquard/field.hpp"
#include "choquard/fft.hpp"
#include "choquard/grid.hpp"

namespace choquard {

/// Evaluate src(scale * x) for x on the target grid by exact evaluation of the
/// source Fourier series (tensor-factored, one dense matrix per axis).
/// Coordinates falling outside the source box evaluate to zero rather than
/// wrapping; the odd Nyquist modes are dropped before evaluation.
inline ScalarField resample_dilate(const ScalarField& src, double scale,
                                   const GridSpec& target) {
  const GridSpec& gs = src.grid;
  if (target.dim != gs.dim) throw std::invalid_argument("resample: dim mismatch");
  const int ns = gs.n, nt = target.n;
  const int dim = gs.dim;

  // spectral coefficients of src, normalized so that
  // src(x) = sum_k F_k exp(i k x)
  std::vector<std::complex<double>> F(gs.npoints());
  {
    std::lock_guard<std::mutex> lk(detail::field_op_mutex());
    auto& ct = detail::cached_complex_transform(gs);
    std::copy(src.data.begin(), src.data.end(), ct.data());
    ct.forward();
    const double inv = 1.0 / static_cast<double>(gs.npoints());
    for (std::size_t i = 0; i < F.size(); ++i) F[i] = ct.data()[i] * inv;
  }
  // drop Nyquist planes (asymmetric modes have no well-defined off-grid value)
  {
    const int n1 = dim >= 2 ? ns : 1;
    const int n2 = dim >= 3 ? ns : 1;
    std::size_t i = 0;
    for (int i0 = 0; i0 < ns; ++i0)
      for (int i1 = 0; i1 < n1; ++i1)
        for (int i2 = 0; i2 < n2; ++i2, ++i)
          if (i0 == ns / 2 || (dim >= 2 && i1 == ns / 2) || (dim >= 3 && i2 == ns / 2))
            F[i] = 0.0;
  }

  // per-axis evaluation matrices; the DFT phases are referenced to the box
  // corner x0 = -L, so E[i*ns + k] = exp(i k_src[k] (t_i + L)).  Rows whose
  // evaluation point leaves the source box are zeroed.
  std::vector<std::complex<double>> E(static_cast<std::size_t>(nt) * ns);
  for (int i = 0; i < nt; ++i) {
    const double t = scale * target.coord(i);
    const bool inside = std::abs(t) <= gs.L;
    for (int k = 0; k < ns; ++k) {
      E[static_cast<std::size_t>(i) * ns + k] =
          inside ? std::exp(std::complex<double>(0.0, gs.wavenumber(k) * (t + gs.L)))
                 : std::complex<double>(0.0, 0.0);
    }
  }

  // contract axis by axis (all axes share E since the grid is cubic and the
  // dilation isotropic); layout stays row-major throughout
  std::vector<std::complex<double>> cur = std::move(F);
  std::vector<int> shape(static_cast<std::size_t>(dim), ns);
  for (int axis = 0; axis < dim; ++axis) {
    std::size_t lead = 1, trail = 1;
    for (int d = 0; d < axis; ++d) lead *= static_cast<std::size_t>(shape[d]);
    for (int d = axis + 1; d < dim; ++d) trail *= static_cast<std::size_t>(shape[d]);
    std::vector<std::complex<double>> next(lead * static_cast<std::size_t>(nt) * trail);
    for (std::size_t a = 0; a < lead; ++a) {
      const std::complex<double>* blk = cur.data() + a * ns * trail;
      std::complex<double>* out = next.data() + a * nt * trail;
      for (int i = 0; i < nt; ++i) {
        const std::complex<double>* Ei = E.data() + static_cast<std::size_t>(i) * ns;
        std::complex<double>* row = out + static_cast<std::size_t>(i) * trail;
        std::fill(row, row + trail, std::complex<double>(0.0, 0.0));
        for (int k = 0; k < ns; ++k) {
          const std::complex<double> e = Ei[k];
          if (e == std::complex<double>(0.0, 0.0)) continue;
          const std::complex<double>* crow = blk + static_cast<std::size_t>(k) * trail;
          for (std::size_t tt = 0; tt < trail; ++tt) row[tt] += e * crow[tt];
        }
      }
    }
    cur = std::move(next);
    shape[axis] = nt;
  }

  ScalarField out = ScalarField::zeros(target, src.kind);
  if (src.is_real()) {
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = cur[i].real();
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = cur[i];
  }
  return out;
}

/// Smallest axis distance from the peak of |f| at which it falls below half
/// of the maximum (linearly interpolated between samples).
inline double profile_half_width(const ScalarField& f) {
  const GridSpec& g = f.grid;
  std::size_t imax = 0;
  double vmax = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double v = std::abs(f.data[i]);
    if (v > vmax) {
      vmax = v;
      imax = i;
    }
  }
  if (!(vmax > 0.0)) throw std::invalid_argument("half_width: zero field");
  const auto peak = g.unravel(imax);
  double best = 2.0 * g.L;
  for (int d = 0; d < g.dim; ++d) {
    for (int dir : {+1, -1}) {
      double prev = vmax;
      for (int step = 1; step <= g.n / 2; ++step) {
        auto c = peak;
        c[d] = peak[d] + dir * step;
        const double v = std::abs(f.data[g.ravel(c)]);
        if (v < vmax / 2.0) {
          const double frac = (prev - vmax / 2.0) / std::max(prev - v, 1e-300);
          best = std::min(best, (step - 1 + frac) * g.spacing());
          break;
        }
        prev = v;
      }
    }
  }
  return best;
}

/// Largest box-chart distance from the peak at which |f| still exceeds
/// rel_threshold * max|f|.
inline double support_radius(const ScalarField& f, double rel_threshold = 1e-10) {
  const GridSpec& g = f.grid;
  std::size_t imax = 0;
  double vmax = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double v = std::abs(f.data[i]);
    if (v > vmax) {
      vmax = v;
      imax = i;
    }
  }
  if (!(vmax > 0.0)) return 0.0;
  const Vec3 xp = g.point(imax);
  double r2max = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (std::abs(f.data[i]) <= rel_threshold * vmax) continue;
    const Vec3 x = g.point(i);
    double r2 = 0.0;
    for (int d = 0; d < g.dim; ++d) {
      const double dd = x[d] - xp[d];
      r2 += dd * dd;
    }
    r2max = std::max(r2max, r2);
  }
  return std::sqrt(r2max);
}

}  // namespace choquard
