#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "choquard/field.hpp"
#include "choquard/ground_state.hpp"
#include "choquard/params.hpp"
#include "choquard/potential.hpp"
#include "choquard/propagator.hpp"
#include "choquard/resample.hpp"
#include "choquard/riesz.hpp"

namespace choquard {

/// One time slice of the observables the main theorem measures.
struct TrajectorySample {
  double t = 0.0;
  double charge = 0.0;
  double energy_total = 0.0;
  double energy_internal = 0.0;   // modulus-only part
  double energy_potential = 0.0;  // int V |psi|^2
  Vec3 barycenter{0.0, 0.0, 0.0};
  Vec3 momentum{0.0, 0.0, 0.0};   // int p_eps
  Vec3 force{0.0, 0.0, 0.0};      // (1/||psi||^2) int grad V |psi|^2
  Vec3 H_eps{0.0, 0.0, 0.0};      // grad V(q) - force
  Vec3 concentration_center{0.0, 0.0, 0.0};
  double mass_outside = 0.0;      // outside B_{rhat eps^beta}(q_hat)
};

struct DiagnosticsSpec {
  double lambda = 0.01;  // recorded with reports; the mass level diagnosed
  double rhat = 8.0;     // concentration radius at profile scale (x eps^beta)
};

namespace detail {

inline Vec3 mollified_argmax(const ScalarField& psi, double width) {
  const GridSpec& g = psi.grid;
  ScalarField dens = ScalarField::zeros(g, PayloadKind::Complex);
  for (std::size_t i = 0; i < psi.size(); ++i) dens.data[i] = std::norm(psi.data[i]);
  std::lock_guard<std::mutex> lk(field_op_mutex());
  auto& ct = cached_complex_transform(g);
  std::copy(dens.data.begin(), dens.data.end(), ct.data());
  ct.forward();
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
        const double k2sum = k0 * k0 + k1 * k1 + k2 * k2;
        ct.data()[i] *= std::exp(-0.5 * k2sum * width * width);
      }
    }
  }
  ct.backward();
  // ties broken by the first (lexicographically smallest) index
  std::size_t imax = 0;
  double vmax = -1.0;
  for (std::size_t j = 0; j < g.npoints(); ++j) {
    const double v = ct.data()[j].real();
    if (v > vmax) {
      vmax = v;
      imax = j;
    }
  }
  return g.point(imax);
}

}  // namespace detail

/// All per-slice observables.  The Newton residual is evaluated through the
/// exact second-derivative identity (the force integral), never by
/// differencing the sampled barycenter.
inline TrajectorySample diagnostics(const ScalarField& psi, double t,
                                    const PotentialSpec& V, const ModelParams& mp,
                                    const DiagnosticsSpec& ds,
                                    const RieszOperator& riesz) {
  TrajectorySample s;
  s.t = t;
  s.charge = charge(psi);
  if (!(s.charge > 0.0)) throw std::invalid_argument("diagnostics: zero charge");
  const GridSpec& g = psi.grid;
  s.barycenter = barycenter(psi);
  s.momentum = momentum_integral(psi, mp.eps);

  // force integral and potential energy in one sweep (closed-form V, grad V)
  double epot = 0.0;
  Vec3 force{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double w = std::norm(psi.data[i]);
    const Vec3 x = g.point(i);
    epot += potential_eval(V, x, g.dim) * w;
    const Vec3 gv = potential_grad(V, x, g.dim);
    for (int d = 0; d < g.dim; ++d) force[d] += gv[d] * w;
  }
  const double vol = g.cell_volume();
  epot *= vol;
  for (int d = 0; d < 3; ++d) force[d] *= vol / s.charge;
  s.force = force;
  const Vec3 gradVq = potential_grad(V, s.barycenter, g.dim);
  for (int d = 0; d < 3; ++d) s.H_eps[d] = gradVq[d] - force[d];

  const double kap = kappa(mp);
  const double D = riesz.hartree_energy(psi, mp.p);
  const double Gpsi = grad_norm_sq(psi);
  const double Gu = grad_norm_sq(modulus(psi));
  s.energy_potential = epot;
  s.energy_total = 0.5 * mp.eps * mp.eps * Gpsi + epot - kap / mp.p * D;
  s.energy_internal = 0.5 * mp.eps * mp.eps * Gu - kap / mp.p * D;

  const double rad = ds.rhat * std::pow(mp.eps, mp.beta);
  s.concentration_center = detail::mollified_argmax(psi, rad / 2.0);
  s.mass_outside = mass_outside_ball(psi, s.concentration_center, rad);
  return s;
}

/// Mollified-density argmax; the estimator behind q_hat.
inline Vec3 concentration_center(const ScalarField& psi, const ModelParams& mp,
                                 double rhat) {
  return detail::mollified_argmax(psi, rhat * std::pow(mp.eps, mp.beta) / 2.0);
}

// ---- classical reference ---------------------------------------------------

struct ClassicalTrajectory {
  std::vector<double> times;
  std::vector<Vec3> q;
  std::vector<Vec3> qdot;
};

/// RK4 on qddot = -grad V(q), q(0) = 0, qdot(0) = v0.
inline ClassicalTrajectory classical_trajectory(const PotentialSpec& V, int dim,
                                                const Vec3& v0, double T, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("classical_trajectory: dt > 0");
  ClassicalTrajectory tr;
  Vec3 q{0.0, 0.0, 0.0};
  Vec3 p = v0;
  auto acc = [&](const Vec3& x) {
    Vec3 a = potential_grad(V, x, dim);
    for (int d = 0; d < 3; ++d) a[d] = -a[d];
    return a;
  };
  const long n = std::max(1L, static_cast<long>(std::llround(T / dt)));
  tr.times.reserve(n + 1);
  tr.q.reserve(n + 1);
  tr.qdot.reserve(n + 1);
  tr.times.push_back(0.0);
  tr.q.push_back(q);
  tr.qdot.push_back(p);
  for (long k = 0; k < n; ++k) {
    const Vec3 k1q = p, k1p = acc(q);
    Vec3 q2, p2;
    for (int d = 0; d < 3; ++d) {
      q2[d] = q[d] + 0.5 * dt * k1q[d];
      p2[d] = p[d] + 0.5 * dt * k1p[d];
    }
    const Vec3 k2q = p2, k2p = acc(q2);
    Vec3 q3, p3;
    for (int d = 0; d < 3; ++d) {
      q3[d] = q[d] + 0.5 * dt * k2q[d];
      p3[d] = p[d] + 0.5 * dt * k2p[d];
    }
    const Vec3 k3q = p3, k3p = acc(q3);
    Vec3 q4, p4;
    for (int d = 0; d < 3; ++d) {
      q4[d] = q[d] + dt * k3q[d];
      p4[d] = p[d] + dt * k3p[d];
    }
    const Vec3 k4q = p4, k4p = acc(q4);
    for (int d = 0; d < 3; ++d) {
      q[d] += dt / 6.0 * (k1q[d] + 2.0 * k2q[d] + 2.0 * k3q[d] + k4q[d]);
      p[d] += dt / 6.0 * (k1p[d] + 2.0 * k2p[d] + 2.0 * k3p[d] + k4p[d]);
    }
    tr.times.push_back((k + 1) * dt);
    tr.q.push_back(q);
    tr.qdot.push_back(p);
  }
  return tr;
}

/// Classical position at time t by 4-point Lagrange interpolation on the
/// uniform RK4 grid.
inline Vec3 classical_at(const ClassicalTrajectory& tr, double t) {
  const std::size_t n = tr.times.size();
  if (n == 0) throw std::invalid_argument("classical_at: empty trajectory");
  if (n == 1) return tr.q[0];
  const double dt = tr.times[1] - tr.times[0];
  if (t < tr.times.front() - 1e-12 || t > tr.times.back() + 1e-12)
    throw std::invalid_argument("classical_at: time outside the trajectory");
  long j = static_cast<long>(std::floor(t / dt));
  j = std::clamp<long>(j - 1, 0, static_cast<long>(n) - 4);
  if (n < 4) j = 0;
  const long m = std::min<std::size_t>(4, n);
  Vec3 out{0.0, 0.0, 0.0};
  for (long a = 0; a < m; ++a) {
    double w = 1.0;
    for (long b = 0; b < m; ++b) {
      if (a == b) continue;
      w *= (t - tr.times[j + b]) / (tr.times[j + a] - tr.times[j + b]);
    }
    for (int d = 0; d < 3; ++d) out[d] += w * tr.q[j + a][d];
  }
  return out;
}

/// Sup-norm distance between the sampled barycenter and the classical path
/// over the common time range.
inline double compare_trajectories(const std::vector<TrajectorySample>& samples,
                                   const ClassicalTrajectory& classical) {
  if (samples.empty() || classical.times.empty())
    throw std::invalid_argument("compare_trajectories: empty input");
  double sup = -1.0;
  bool any = false;
  for (const auto& s : samples) {
    if (s.t < classical.times.front() - 1e-12 ||
        s.t > classical.times.back() + 1e-12)
      continue;
    any = true;
    const Vec3 qc = classical_at(classical, s.t);
    double d2 = 0.0;
    for (int d = 0; d < 3; ++d) {
      const double dd = s.barycenter[d] - qc[d];
      d2 += dd * dd;
    }
    sup = std::max(sup, std::sqrt(d2));
  }
  if (!any) throw std::invalid_argument("compare_trajectories: no time overlap");
  return sup;
}

// ---- runs and sweeps --------------------------------------------------------

struct EvolutionResult {
  std::vector<TrajectorySample> samples;
  double dt = 0.0;
  long steps = 0;
  double charge_drift = 0.0;       // max |C(t)/C(0) - 1|
  double energy_drift = 0.0;       // max |E(t) - E(0)| / |E(0)|
  ScalarField psi_final;
};

/// Evolve with per-stride diagnostics; dt from the phase-resolution rule
/// rounded so the horizon is hit exactly.
inline EvolutionResult evolve_with_diagnostics(
    const ScalarField& psi0, const ModelParams& mp, const PotentialSpec& V,
    std::shared_ptr<const RieszOperator> riesz, double T, double c_t, long stride,
    const DiagnosticsSpec& ds, double dt_override = 0.0,
    const std::function<void(const Propagator&, const TrajectorySample&)>& on_sample =
        nullptr) {
  double dt = dt_override;
  if (!(dt > 0.0)) {
    const double bound = Propagator::resolution_dt(psi0, mp, V, *riesz, c_t);
    dt = T > 0.0 ? T / std::ceil(T / bound) : bound;
  }
  Propagator prop(psi0, mp, V, riesz, dt);
  EvolutionResult res;
  res.dt = dt;
  auto cb = [&](Propagator& P) {
    TrajectorySample s = diagnostics(P.psi(), P.t(), V, mp, ds, *riesz);
    if (!res.samples.empty()) {
      const auto& s0 = res.samples.front();
      res.charge_drift =
          std::max(res.charge_drift, std::abs(s.charge / s0.charge - 1.0));
      if (s0.energy_total != 0.0)
        res.energy_drift =
            std::max(res.energy_drift, std::abs((s.energy_total - s0.energy_total) /
                                                s0.energy_total));
    }
    if (on_sample) on_sample(P, s);
    res.samples.push_back(std::move(s));
  };
  evolve(prop, T, stride, cb);
  res.steps = prop.steps_taken();
  res.psi_final = prop.psi();
  return res;
}

struct SweepMember {
  double eps = 0.0;
  int n = 0;
  double dt = 0.0;
  long steps = 0;
  double sup_H = 0.0;
  double sup_traj_dist = 0.0;
  double charge_drift = 0.0;
  double energy_drift = 0.0;
  std::vector<TrajectorySample> samples;
};

struct SweepConfig {
  ModelParams base;               // eps replaced per member
  std::vector<double> eps_list;
  std::vector<int> n_list;        // per-member grid; empty = scale from grid_n
  int grid_n = 128;               // evolution grid at eps_list[0]
  double L_evolve = 4.0;
  GridSpec profile_grid{2, 128, 8.0};
  double nu = 16.0;
  FlowOptions flow;
  PotentialSpec V;
  double T = 1.0;
  double c_t = 0.5;
  long stride = 1;
  DiagnosticsSpec diag;
  RieszMode mode = RieszMode::FreeSpace;
};

struct SweepReport {
  GroundState profile;
  std::vector<SweepMember> members;
  ClassicalTrajectory classical;
  bool completed = false;
  std::string failure;  // first member failure, when not completed
};

/// Shared profile, then one evolution per epsilon; any member failure aborts
/// with a partial report.
inline SweepReport run_epsilon_sweep(const SweepConfig& cfg, int threads = 1) {
  SweepReport rep;
  const int dim = cfg.profile_grid.dim;
  auto prof_op = RieszOperator::build_shared(cfg.profile_grid, cfg.base.theta, cfg.mode);
  rep.profile = normalized_gradient_flow(*prof_op, cfg.nu, cfg.base.p, cfg.flow);
  const double hw = profile_half_width(rep.profile.U);
  DiagnosticsSpec ds = cfg.diag;
  ds.rhat = cfg.diag.rhat * hw;  // rhat configured in profile half-widths

  rep.classical = classical_trajectory(cfg.V, dim, cfg.base.v, cfg.T,
                                       std::min(1e-3, cfg.T / 1000.0));

  std::vector<int> ns = cfg.n_list;
  if (ns.empty()) {
    for (double e : cfg.eps_list) {
      const double scale = std::pow(cfg.eps_list[0] / e, cfg.base.beta);
      int n = cfg.grid_n;
      while (n < cfg.grid_n * scale * 0.999) n *= 2;
      ns.push_back(n);
    }
  }
  if (ns.size() != cfg.eps_list.size())
    throw std::invalid_argument("sweep: eps and n lists differ in length");

  rep.members.resize(cfg.eps_list.size());
  std::vector<std::string> errors(cfg.eps_list.size());
  auto run_member = [&](std::size_t idx) {
    try {
      ModelParams mp = cfg.base;
      mp.eps = cfg.eps_list[idx];
      mp.omega = rep.profile.omega;
      auto g = GridSpec::make(dim, ns[idx], cfg.L_evolve);
      auto op = RieszOperator::build_shared(g, mp.theta, cfg.mode);
      ScalarField psi0 = build_initial_data(rep.profile.U, mp, g);
      EvolutionResult er = evolve_with_diagnostics(psi0, mp, cfg.V, op, cfg.T,
                                                   cfg.c_t, cfg.stride, ds);
      SweepMember m;
      m.eps = mp.eps;
      m.n = ns[idx];
      m.dt = er.dt;
      m.steps = er.steps;
      m.charge_drift = er.charge_drift;
      m.energy_drift = er.energy_drift;
      for (const auto& s : er.samples) {
        double Hn = 0.0;
        for (int d = 0; d < dim; ++d) Hn += s.H_eps[d] * s.H_eps[d];
        m.sup_H = std::max(m.sup_H, std::sqrt(Hn));
      }
      m.sup_traj_dist = compare_trajectories(er.samples, rep.classical);
      m.samples = std::move(er.samples);
      rep.members[idx] = std::move(m);
    } catch (const std::exception& e) {
      errors[idx] = e.what();
    }
  };

  if (threads <= 1 || cfg.eps_list.size() == 1) {
    for (std::size_t i = 0; i < cfg.eps_list.size(); ++i) run_member(i);
  } else {
    std::vector<std::thread> pool;
    std::size_t next = 0;
    std::mutex next_mutex;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&]() {
        for (;;) {
          std::size_t i;
          {
            std::lock_guard<std::mutex> lk(next_mutex);
            if (next >= cfg.eps_list.size()) return;
            i = next++;
          }
          run_member(i);
        }
      });
    for (auto& th : pool) th.join();
  }

  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) {
      rep.failure = "member eps = " + std::to_string(cfg.eps_list[i]) + ": " + errors[i];
      rep.members.resize(i);  // partial report up to the failed member
      return rep;
    }
  }
  rep.completed = true;
  return rep;
}

/// Trajectory CSV; one row per sample, vector columns carry dim components.
inline void write_trajectory_csv(std::ostream& os,
                                 const std::vector<TrajectorySample>& samples,
                                 int dim) {
  auto vec_cols = [&](const char* base) {
    std::string s;
    const char* ax = "xyz";
    for (int d = 0; d < dim; ++d) {
      s += ',';
      s += base;
      s += ax[d];
    }
    return s;
  };
  os << "t,charge,E_total,E_internal,E_potential" << vec_cols("q") << vec_cols("p")
     << vec_cols("f") << vec_cols("H") << vec_cols("qhat") << ",mass_outside\n";
  char buf[64];
  auto put = [&](double v, bool lead_comma = true) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    if (lead_comma) os << ',';
    os << buf;
  };
  for (const auto& s : samples) {
    put(s.t, false);
    put(s.charge);
    put(s.energy_total);
    put(s.energy_internal);
    put(s.energy_potential);
    for (int d = 0; d < dim; ++d) put(s.barycenter[d]);
    for (int d = 0; d < dim; ++d) put(s.momentum[d]);
    for (int d = 0; d < dim; ++d) put(s.force[d]);
    for (int d = 0; d < dim; ++d) put(s.H_eps[d]);
    for (int d = 0; d < dim; ++d) put(s.concentration_center[d]);
    put(s.mass_outside);
    os << '\n';
  }
}

}  // namespace choquard
