#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "choquard/field.hpp"
#include "choquard/fft.hpp"
#include "choquard/resample.hpp"
#include "choquard/riesz.hpp"

namespace choquard {

// J(u) = 1/2 ||grad u||^2 - D(u)/p on the sphere ||u||^2 = nu; its L2
// gradient realizes <J'(u), v> = int grad u . grad v - 2 int (I*|u|^p)|u|^(p-2) u v.

inline double J_functional(const RieszOperator& op, const ScalarField& u, double p) {
  return 0.5 * grad_norm_sq(u) - op.hartree_energy(u, p) / p;
}

inline ScalarField grad_J(const RieszOperator& op, const ScalarField& u, double p) {
  ScalarField nl = op.nonlocal_term(u, p);
  ScalarField lap = laplacian(u);
  ScalarField out = ScalarField::zeros(u.grid, PayloadKind::Real);
  for (std::size_t i = 0; i < u.size(); ++i)
    out.data[i] = -lap.data[i].real() - 2.0 * nl.data[i].real();
  return out;
}

inline double E_omega(const RieszOperator& op, const ScalarField& u, double p,
                      double omega) {
  return 0.5 * grad_norm_sq(u) + omega * charge(u) - op.hartree_energy(u, p) / p;
}

/// 1/2 ||grad u||^2 + omega ||u||^2 - D(u); zero on the Nehari set.
inline double nehari_residual(const RieszOperator& op, const ScalarField& u, double p,
                              double omega) {
  return 0.5 * grad_norm_sq(u) + omega * charge(u) - op.hartree_energy(u, p);
}

/// Multiplier of the stationary equation, omega = (hc*D - kc*||grad u||^2/2)/||u||^2.
/// The default coefficients (1, 1) extract at profile level; pass (eps^2,
/// kappa) to extract from a rescaled profile.
inline double extract_omega(const RieszOperator& op, const ScalarField& u, double p,
                            double kinetic_coeff = 1.0, double hartree_coeff = 1.0) {
  const double D = op.hartree_energy(u, p);
  const double G = grad_norm_sq(u);
  const double nu = charge(u);
  if (!(nu > 0.0)) throw std::invalid_argument("extract_omega: zero field");
  return (hartree_coeff * D - 0.5 * kinetic_coeff * G) / nu;
}

/// Left-hand sides of the Pohozaev system (dilation identity, Nehari line,
/// energy line minus E_omega), each normalized by ||grad u||^2.
inline std::array<double, 3> pohozaev_residuals(const RieszOperator& op,
                                                const ScalarField& u, double p,
                                                double omega) {
  const int N = u.grid.dim;
  const double th = op.theta();
  const double G = grad_norm_sq(u);
  const double nu = charge(u);
  const double D = op.hartree_energy(u, p);
  if (!(G > 0.0)) throw std::invalid_argument("pohozaev: zero gradient");
  const double r1 = 0.5 * (N - 2.0) * G + omega * N * nu - (N + th) / p * D;
  const double r2 = 0.5 * G + omega * nu - D;
  const double r3 = (0.5 * G + omega * nu - D / p) - E_omega(op, u, p, omega);
  return {r1 / G, r2 / G, r3 / G};
}

/// sigma = (N + theta - (N-2)p) / (2 omega (p-1)) * c_min; the squared L2
/// norm of every ground state with multiplier omega.
inline double sigma_value(int N, double theta, double p, double omega, double c_min) {
  if (!(c_min > 0.0)) throw std::invalid_argument("sigma: need c_min > 0");
  const double num = N + theta - (N - 2.0) * p;
  if (!(num > 0.0 && omega > 0.0 && p > 1.0))
    throw std::invalid_argument("sigma: denominator not positive");
  return num / (2.0 * omega * (p - 1.0)) * c_min;
}

struct FlowOptions {
  double dtau = 0.0;                // <= 0: default 0.1 h^2
  double tol = 1e-8;                // sup-norm increment rate
  long max_iters = 200000;
  double seed_width = 0.0;          // <= 0: default L/6
  Vec3 seed_center{0.0, 0.0, 0.0};
  unsigned long perturb_seed = 0;   // nonzero: add a small smooth bump to the seed
  bool project_positive = true;
};

struct GroundState {
  ScalarField U;
  double nu = 0.0;
  double omega = 0.0;
  double J_value = 0.0;
  double residual_flow = 0.0;
  std::array<double, 3> pohozaev_residuals{0.0, 0.0, 0.0};
  double nehari_residual = 0.0;
  long iterations = 0;
  std::vector<double> J_history;  // J at each accepted step
};

class FlowError : public std::runtime_error {
 public:
  FlowError(const std::string& msg, double residual)
      : std::runtime_error(msg), last_residual(residual) {}
  double last_residual;
};

namespace detail {

// |k|^2 on the r2c half-spectrum layout, plus the Hermitian weight (2 for
// interior last-axis bins, 1 for the self-conjugate planes).
struct HalfSpectrumTables {
  std::vector<double> k2;
  std::vector<double> weight;
  explicit HalfSpectrumTables(const GridSpec& g) {
    const int n = g.n, dim = g.dim;
    const int nlast = n / 2 + 1;
    const int m0 = dim >= 2 ? n : 1;
    const int m1 = dim >= 3 ? n : 1;
    k2.reserve(static_cast<std::size_t>(m0) * m1 * nlast);
    weight.reserve(k2.capacity());
    for (int i0 = 0; i0 < m0; ++i0) {
      const double k0 = dim >= 2 ? g.wavenumber(i0) : 0.0;
      for (int i1 = 0; i1 < m1; ++i1) {
        const double k1 = dim >= 3 ? g.wavenumber(i1) : 0.0;
        for (int il = 0; il < nlast; ++il) {
          const double kl = g.wavenumber(il);
          k2.push_back(k0 * k0 + k1 * k1 + kl * kl);
          weight.push_back((il == 0 || il == n / 2) ? 1.0 : 2.0);
        }
      }
    }
  }
};

}  // namespace detail

/// Normalized gradient flow on the charge sphere: semi-implicit diffusion in
/// spectral space, explicit nonlocal term, renormalization each step, with
/// dtau halved whenever J fails to decrease.
inline GroundState normalized_gradient_flow(const RieszOperator& op, double nu,
                                            double p, FlowOptions opts = {}) {
  if (!(nu > 0.0)) throw std::invalid_argument("flow: nu must be positive");
  const GridSpec& g = op.grid();
  const double h = g.spacing();
  const double dtau0 = opts.dtau > 0.0 ? opts.dtau : 0.1 * h * h;
  const double seed_width = opts.seed_width > 0.0 ? opts.seed_width : g.L / 6.0;
  const std::size_t M = g.npoints();
  const double cellvol = g.cell_volume();

  RealTransform rt(std::vector<int>(static_cast<std::size_t>(g.dim), g.n));
  detail::HalfSpectrumTables tab(g);

  std::vector<double> u(M), u_prev(M), nl_prev(M), gbuf(M), conv(M);

  // positive seed, renormalized to the sphere
  {
    ScalarField seed = make_gaussian(g, opts.seed_center, seed_width);
    if (opts.perturb_seed != 0) {
      ScalarField bump = make_random_smooth(g, opts.perturb_seed);
      double bmax = linf_norm(bump);
      for (std::size_t i = 0; i < M; ++i)
        seed.data[i] += 0.1 * std::abs(bump.data[i].real()) / bmax;
    }
    double c = 0.0;
    for (std::size_t i = 0; i < M; ++i) c += std::norm(seed.data[i]);
    c *= cellvol;
    const double s = std::sqrt(nu / c);
    for (std::size_t i = 0; i < M; ++i) u[i] = s * seed.data[i].real();
  }

  // The multiplier shift sits inside the implicit solve: pairing the fixed
  // point with u shows the renormalization scale is then exactly 1, so the
  // limit solves the discrete stationary equation with unit coupling (the
  // unshifted scheme leaves an O(dtau * omega) bias in the multiplier).
  auto semi_implicit = [&](const std::vector<double>& base,
                           const std::vector<double>& nl, double dtau,
                           double omega_shift, std::vector<double>& out) {
    double* rb = rt.real_data();
    for (std::size_t i = 0; i < M; ++i) rb[i] = base[i] + dtau * nl[i];
    rt.forward();
    std::complex<double>* cb = rt.complex_data();
    const double inv = 1.0 / static_cast<double>(rt.logical_size());
    const double shift = std::max(omega_shift, -0.5 / dtau);
    for (std::size_t i = 0; i < tab.k2.size(); ++i)
      cb[i] *= inv / (1.0 + dtau * (0.5 * tab.k2[i] + shift));
    rt.backward();
    double c = 0.0;
    if (opts.project_positive) {
      for (std::size_t i = 0; i < M; ++i) {
        const double v = rb[i] > 0.0 ? rb[i] : 0.0;
        out[i] = v;
        c += v * v;
      }
    } else {
      for (std::size_t i = 0; i < M; ++i) {
        out[i] = rb[i];
        c += rb[i] * rb[i];
      }
    }
    c *= cellvol;
    const double s = std::sqrt(nu / c);
    for (std::size_t i = 0; i < M; ++i) out[i] *= s;
  };

  auto grad_sq = [&](const std::vector<double>& w) {
    double* rb = rt.real_data();
    std::copy(w.begin(), w.end(), rb);
    rt.forward();
    const std::complex<double>* cb = rt.complex_data();
    double s = 0.0;
    for (std::size_t i = 0; i < tab.k2.size(); ++i)
      s += tab.weight[i] * tab.k2[i] * std::norm(cb[i]);
    return s * cellvol / static_cast<double>(rt.logical_size());
  };

  std::vector<double> J_accepted;
  double dtau = dtau0;
  double dtau_used = dtau0;
  double J_prev = std::numeric_limits<double>::infinity();
  double omega_prev = 0.0;
  double rate = std::numeric_limits<double>::infinity();
  bool have_prev = false;
  bool converged = false;
  long iter = 0;
  double J_cur = 0.0;

  for (; iter < opts.max_iters; ++iter) {
    for (std::size_t i = 0; i < M; ++i) gbuf[i] = std::pow(std::abs(u[i]), p);
    op.convolve_raw(gbuf.data(), conv.data());
    double D = 0.0;
    for (std::size_t i = 0; i < M; ++i) D += conv[i] * gbuf[i];
    D *= cellvol;
    const double G = grad_sq(u);
    J_cur = 0.5 * G - D / p;
    const double omega_cur = (D - 0.5 * G) / nu;

    const double slack = 1e-13 * (1.0 + std::abs(J_prev));
    if (have_prev && J_cur > J_prev + slack) {
      // reject the candidate; retry from the last accepted iterate
      dtau *= 0.5;
      if (dtau < dtau0 * 1e-12)
        throw FlowError("flow: step size collapsed without J decrease", rate);
      semi_implicit(u_prev, nl_prev, dtau, omega_prev, u);
      dtau_used = dtau;
      continue;
    }

    if (have_prev) {
      double inc = 0.0;
      for (std::size_t i = 0; i < M; ++i)
        inc = std::max(inc, std::abs(u[i] - u_prev[i]));
      rate = inc / dtau_used;
      if (rate < opts.tol) {
        converged = true;
        break;
      }
    }

    // accept u; prepare the next candidate
    for (std::size_t i = 0; i < M; ++i) {
      const double au = std::abs(u[i]);
      const double mod = au > 0.0 ? std::pow(au, p - 2.0) * u[i] : 0.0;
      nl_prev[i] = conv[i] * mod;
    }
    u_prev = u;
    J_prev = J_cur;
    omega_prev = omega_cur;
    have_prev = true;
    dtau_used = dtau;
    J_accepted.push_back(J_cur);
    semi_implicit(u_prev, nl_prev, dtau, omega_prev, u);
  }

  if (!converged)
    throw FlowError("flow: no convergence within max_iters", rate);

  GroundState gs;
  gs.U = ScalarField::zeros(g, PayloadKind::Real);
  for (std::size_t i = 0; i < M; ++i) gs.U.data[i] = u[i];
  gs.nu = charge(gs.U);
  gs.residual_flow = rate;
  gs.iterations = iter;
  gs.J_history = std::move(J_accepted);
  gs.J_value = J_functional(op, gs.U, p);
  if (!(gs.J_value < 0.0))
    throw FlowError("flow: converged state is not a minimizer candidate (J >= 0)",
                    rate);
  gs.omega = extract_omega(op, gs.U, p);
  gs.pohozaev_residuals = pohozaev_residuals(op, gs.U, p, gs.omega);
  gs.nehari_residual = nehari_residual(op, gs.U, p, gs.omega) / grad_norm_sq(gs.U);
  return gs;
}

namespace detail {

inline void check_dilation_fits(const ScalarField& f, double tau) {
  if (tau >= 1.0) return;  // contraction keeps the support inside
  // mass that the expansion by 1/tau would push outside the box
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
  const double keep_radius = tau * (g.L - 2.0 * g.spacing());
  if (mass_outside_ball(f, g.point(imax), keep_radius) > 1e-10)
    throw std::invalid_argument("dilation pushes the support outside the box");
}

}  // namespace detail

/// Sphere-side minimizer -> Nehari-side solution at the requested omega:
/// w(x) = tau^((theta+2)/(2(p-1))) u(tau x), tau = sqrt(omega_target / omega(u)).
inline ScalarField sphere_to_nehari(const RieszOperator& op, const ScalarField& U,
                                    double p, double omega_target) {
  const double om = extract_omega(op, U, p);
  if (!(om > 0.0))
    throw std::invalid_argument("sphere_to_nehari: extracted multiplier not positive");
  const double tau = std::sqrt(omega_target / om);
  if (tau == 1.0) return U;
  detail::check_dilation_fits(U, tau);
  const double amp = std::pow(tau, (op.theta() + 2.0) / (2.0 * (p - 1.0)));
  ScalarField w = resample_dilate(U, tau, U.grid);
  for (auto& z : w.data) z *= amp;
  return w;
}

/// Nehari-side solution -> sphere side at the requested charge:
/// tau = (nu / ||w||^2)^((p-1)/(theta+2-N(p-1))).
inline ScalarField nehari_to_sphere(const RieszOperator& op, const ScalarField& w,
                                    double p, double nu_target) {
  const int N = w.grid.dim;
  const double th = op.theta();
  const double expo = (p - 1.0) / (th + 2.0 - N * (p - 1.0));
  const double tau = std::pow(nu_target / charge(w), expo);
  if (tau == 1.0) return w;
  detail::check_dilation_fits(w, tau);
  const double amp = std::pow(tau, (th + 2.0) / (2.0 * (p - 1.0)));
  ScalarField u = resample_dilate(w, tau, w.grid);
  for (auto& z : u.data) z *= amp;
  return u;
}

/// Find tau in (0, 1] with J(u_tau) < 0 for u_tau = tau^(N/2) u(tau x), using
/// the two-term closed form J(u_tau) = tau^2 ||grad u||^2/2 - tau^s D(u)/p,
/// s = Np - theta - N in (0, 2); no field rescaling involved.
inline std::pair<double, double> find_negative_dilation(const RieszOperator& op,
                                                        const ScalarField& u,
                                                        double p) {
  const int N = u.grid.dim;
  const double s = N * p - op.theta() - N;
  const double G = grad_norm_sq(u);
  const double D = op.hartree_energy(u, p);
  if (!(D > 0.0))
    throw std::invalid_argument("find_negative_dilation: degenerate field (D = 0)");
  auto Jtau = [&](double tau) {
    return 0.5 * tau * tau * G - std::pow(tau, s) * D / p;
  };
  double tau = 1.0;
  double val = Jtau(tau);
  for (int k = 0; k < 2000 && !(val < 0.0); ++k) {
    tau *= 0.5;
    val = Jtau(tau);
  }
  if (!(val < 0.0))
    throw std::invalid_argument("find_negative_dilation: no negative value found");
  return {tau, val};
}

}  // namespace choquard
