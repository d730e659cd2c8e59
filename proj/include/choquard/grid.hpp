#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace choquard {

using Vec3 = std::array<double, 3>;

/// Uniform periodic cubic grid on [-L, L)^dim with n points per axis.
struct GridSpec {
  int dim = 1;
  int n = 8;       // per-axis count, power of two, >= 8
  double L = 1.0;  // half-width

  static GridSpec make(int dim, int n, double L) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("grid: dim must be 1, 2 or 3");
    if (n < 8 || (n & (n - 1)) != 0)
      throw std::invalid_argument("grid: n must be a power of two >= 8");
    if (!(L > 0.0)) throw std::invalid_argument("grid: L must be positive");
    return GridSpec{dim, n, L};
  }

  double spacing() const { return 2.0 * L / n; }
  std::size_t npoints() const {
    std::size_t m = 1;
    for (int d = 0; d < dim; ++d) m *= static_cast<std::size_t>(n);
    return m;
  }
  double cell_volume() const { return std::pow(spacing(), dim); }

  double coord(int i) const { return -L + i * spacing(); }
  // Angular wavenumber of FFT bin i (period 2L).
  double wavenumber(int i) const {
    const int m = (i < n / 2) ? i : i - n;
    return std::numbers::pi / L * m;
  }

  // Row-major index decomposition; index = (i0*n + i1)*n + i2 for dim 3, etc.
  std::array<int, 3> unravel(std::size_t idx) const {
    std::array<int, 3> c{0, 0, 0};
    for (int d = dim - 1; d >= 0; --d) {
      c[d] = static_cast<int>(idx % n);
      idx /= n;
    }
    return c;
  }
  std::size_t ravel(const std::array<int, 3>& c) const {
    std::size_t idx = 0;
    for (int d = 0; d < dim; ++d) idx = idx * n + ((c[d] % n + n) % n);
    return idx;
  }

  Vec3 point(std::size_t idx) const {
    auto c = unravel(idx);
    Vec3 x{0.0, 0.0, 0.0};
    for (int d = 0; d < dim; ++d) x[d] = coord(c[d]);
    return x;
  }

  // Minimal-image displacement of coordinate a relative to b.
  double periodic_delta(double a, double b) const {
    double d = a - b;
    const double span = 2.0 * L;
    d -= span * std::round(d / span);
    return d;
  }
  double periodic_distance_sq(const Vec3& a, const Vec3& b) const {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) {
      const double dd = periodic_delta(a[d], b[d]);
      s += dd * dd;
    }
    return s;
  }

  bool operator==(const GridSpec& o) const {
    return dim == o.dim && n == o.n && L == o.L;
  }
};

}  // namespace choquard
