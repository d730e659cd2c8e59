#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "choquard/config.hpp"
#include "choquard/dynamics.hpp"
#include "choquard/epstein.hpp"
#include "choquard/snapshot.hpp"

namespace choquard {

// CHOQUARD_LOG = quiet | info | debug (default info); messages go to stderr
// so the machine-readable outputs stay clean.
inline int log_level() {
  static int level = [] {
    const char* env = std::getenv("CHOQUARD_LOG");
    if (!env) return 1;
    const std::string s(env);
    if (s == "quiet") return 0;
    if (s == "debug") return 2;
    return 1;
  }();
  return level;
}

template <typename... Args>
void log_info(const char* fmt, Args... args) {
  if (log_level() >= 1) {
    std::fprintf(stderr, fmt, args...);
    std::fprintf(stderr, "\n");
  }
}

template <typename... Args>
void log_debug(const char* fmt, Args... args) {
  if (log_level() >= 2) {
    std::fprintf(stderr, fmt, args...);
    std::fprintf(stderr, "\n");
  }
}

struct CliOptions {
  unsigned long seed = 0;   // 0: use the config's seeds unchanged
  int threads = 0;          // 0: hardware concurrency
  std::string out_override; // empty: config output directory
};

namespace detail {

inline std::filesystem::path prepare_outdir(const ExperimentConfig& cfg,
                                            const CliOptions& opt) {
  std::filesystem::path dir =
      opt.out_override.empty() ? cfg.output.directory : opt.out_override;
  std::filesystem::create_directories(dir);
  return dir;
}

inline FlowOptions flow_options(const ExperimentConfig& cfg, const CliOptions& opt) {
  FlowOptions fo;
  fo.dtau = cfg.flow.dtau;
  fo.tol = cfg.flow.tol;
  fo.max_iters = cfg.flow.max_iters;
  fo.seed_width = cfg.flow.seed_width;
  fo.perturb_seed = opt.seed != 0 ? opt.seed : cfg.flow.perturb_seed;
  return fo;
}

inline json ground_state_record(const GroundState& gs) {
  json j;
  j["nu"] = gs.nu;
  j["omega"] = gs.omega;
  j["J_value"] = gs.J_value;
  j["residual_flow"] = gs.residual_flow;
  j["pohozaev_residuals"] = gs.pohozaev_residuals;
  j["nehari_residual"] = gs.nehari_residual;
  j["iterations"] = gs.iterations;
  return j;
}

inline int fail_with_record(const std::exception& e) {
  json err;
  err["error"] = e.what();
  std::fprintf(stdout, "%s\n", err.dump().c_str());
  return 1;
}

}  // namespace detail

/// ground-state: run the flow with full certification, write the profile
/// snapshot and a metadata record.
inline int cmd_ground_state(const ExperimentConfig& cfg, const CliOptions& opt = {}) {
  try {
    auto dir = detail::prepare_outdir(cfg, opt);
    auto g = cfg.flow_grid();
    auto op = RieszOperator::build_shared(g, cfg.model.theta, cfg.mode);
    auto fo = detail::flow_options(cfg, opt);
    log_info("ground-state: flow on %dd grid n=%d L=%g nu=%g", g.dim, g.n, g.L,
             cfg.flow.nu);
    GroundState gs = normalized_gradient_flow(*op, cfg.flow.nu, cfg.model.p, fo);
    json rec = detail::ground_state_record(gs);
    if (cfg.flow.sigma_mode) {
      // close the sigma fixed point: re-run with nu = sigma(E_omega)
      const double c = E_omega(*op, gs.U, cfg.model.p, gs.omega);
      const double sig =
          sigma_value(g.dim, cfg.model.theta, cfg.model.p, gs.omega, c);
      log_info("ground-state: sigma mode, re-running at nu = %g", sig);
      GroundState gs2 = normalized_gradient_flow(*op, sig, cfg.model.p, fo);
      rec["sigma_pass"] = detail::ground_state_record(gs2);
      rec["sigma_target"] = sig;
      gs = std::move(gs2);
    }
    write_snapshot((dir / "U.chqf").string(), gs.U);
    std::ofstream os(dir / "ground_state.json");
    os << rec.dump(2) << "\n";
    log_info("ground-state: J=%g omega=%g iterations=%ld", gs.J_value, gs.omega,
             gs.iterations);
    return 0;
  } catch (const std::exception& e) {
    return detail::fail_with_record(e);
  }
}

/// evolve: profile flow, initial data, propagation, trajectory CSV (+ optional
/// field snapshots).
inline int cmd_evolve(const ExperimentConfig& cfg, const CliOptions& opt = {}) {
  try {
    auto dir = detail::prepare_outdir(cfg, opt);
    auto pg = cfg.flow_grid();
    auto pop = RieszOperator::build_shared(pg, cfg.model.theta, cfg.mode);
    auto fo = detail::flow_options(cfg, opt);
    GroundState gs = normalized_gradient_flow(*pop, cfg.flow.nu, cfg.model.p, fo);
    log_info("evolve: profile J=%g omega=%g", gs.J_value, gs.omega);

    ModelParams mp = cfg.model;
    mp.omega = gs.omega;
    auto eop = (cfg.grid == pg)
                   ? pop
                   : RieszOperator::build_shared(cfg.grid, mp.theta, cfg.mode);
    ScalarField psi0 = build_initial_data(gs.U, mp, cfg.grid);
    DiagnosticsSpec ds;
    ds.lambda = cfg.diag.lambda;
    ds.rhat = cfg.diag.rhat_halfwidths * profile_half_width(gs.U);

    long snap_count = 0;
    auto on_sample = [&](const Propagator& P, const TrajectorySample&) {
      if (cfg.output.snapshot_stride > 0 &&
          P.steps_taken() % cfg.output.snapshot_stride == 0) {
        char name[64];
        std::snprintf(name, sizeof(name), "psi_%06ld.chqf", P.steps_taken());
        write_snapshot((dir / name).string(), P.psi());
        ++snap_count;
      }
    };
    EvolutionResult res = evolve_with_diagnostics(
        psi0, mp, cfg.potential, eop, cfg.evolve.T, cfg.evolve.c_t,
        cfg.evolve.callback_stride, ds, 0.0, on_sample);

    std::ofstream csv(dir / "trajectory.csv");
    write_trajectory_csv(csv, res.samples, cfg.grid.dim);
    json summary;
    summary["dt"] = res.dt;
    summary["steps"] = res.steps;
    summary["samples"] = res.samples.size();
    summary["charge_drift"] = res.charge_drift;
    summary["energy_drift"] = res.energy_drift;
    summary["snapshots"] = snap_count;
    summary["profile"] = detail::ground_state_record(gs);
    std::ofstream os(dir / "evolve_summary.json");
    os << summary.dump(2) << "\n";
    log_info("evolve: %ld steps, dt=%g, charge drift %.2e", res.steps, res.dt,
             res.charge_drift);
    return 0;
  } catch (const std::exception& e) {
    return detail::fail_with_record(e);
  }
}

/// sweep: run_epsilon_sweep over the configured eps list, per-member CSVs and
/// a summary.
inline int cmd_sweep(const ExperimentConfig& cfg, const CliOptions& opt = {}) {
  try {
    auto dir = detail::prepare_outdir(cfg, opt);
    if (cfg.sweep.eps.empty())
      throw ConfigError("config: sweep.eps must be nonempty for the sweep command");
    SweepConfig sc;
    sc.base = cfg.model;
    sc.eps_list = cfg.sweep.eps;
    sc.n_list = cfg.sweep.n;
    sc.grid_n = cfg.grid.n;
    sc.L_evolve = cfg.grid.L;
    sc.profile_grid = cfg.flow_grid();
    sc.nu = cfg.flow.nu;
    sc.flow = detail::flow_options(cfg, opt);
    sc.V = cfg.potential;
    sc.T = cfg.evolve.T;
    sc.c_t = cfg.evolve.c_t;
    sc.stride = cfg.evolve.callback_stride;
    sc.diag.lambda = cfg.diag.lambda;
    sc.diag.rhat = cfg.diag.rhat_halfwidths;  // scaled by the profile half-width inside
    sc.mode = cfg.mode;
    int threads = opt.threads > 0
                      ? opt.threads
                      : static_cast<int>(std::thread::hardware_concurrency());
    SweepReport rep = run_epsilon_sweep(sc, threads);

    json summary;
    summary["completed"] = rep.completed;
    if (!rep.failure.empty()) summary["failure"] = rep.failure;
    summary["profile"] = detail::ground_state_record(rep.profile);
    json members = json::array();
    for (const auto& m : rep.members) {
      char name[64];
      std::snprintf(name, sizeof(name), "trajectory_eps_%g.csv", m.eps);
      std::ofstream csv(dir / name);
      write_trajectory_csv(csv, m.samples, cfg.grid.dim);
      json mj;
      mj["eps"] = m.eps;
      mj["n"] = m.n;
      mj["dt"] = m.dt;
      mj["steps"] = m.steps;
      mj["sup_H"] = m.sup_H;
      mj["sup_traj_dist"] = m.sup_traj_dist;
      mj["charge_drift"] = m.charge_drift;
      mj["energy_drift"] = m.energy_drift;
      mj["csv"] = name;
      members.push_back(mj);
    }
    summary["members"] = members;
    std::ofstream os(dir / "sweep_summary.json");
    os << summary.dump(2) << "\n";
    log_info("sweep: %zu members, completed=%d", rep.members.size(),
             rep.completed ? 1 : 0);
    if (!rep.completed) {
      json err;
      err["error"] = rep.failure;
      std::fprintf(stdout, "%s\n", err.dump().c_str());
      return 2;
    }
    return 0;
  } catch (const std::exception& e) {
    return detail::fail_with_record(e);
  }
}

/// check: parameter validation, potential certification, and the invariant
/// smoke suite; prints one pass/fail line per item.
inline int cmd_check(const ExperimentConfig& cfg, const CliOptions& opt = {}) {
  try {
    bool all_ok = true;
    auto report = [&](const char* name, bool ok, const std::string& detail) {
      std::printf("[%s] %-22s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
      all_ok = all_ok && ok;
    };

    auto vr = validate(cfg.model);
    std::string vmsg = "alpha=" + std::to_string(cfg.model.alpha) +
                       " beta=" + std::to_string(cfg.model.beta);
    if (!vr.ok()) {
      vmsg = "violations:";
      for (const auto& s : vr.violations) vmsg += " " + s;
    }
    report("params", vr.ok(), vmsg);

    std::vector<double> shells;
    for (double r = cfg.potential.R1 * 1.1; r < cfg.potential.R1 * 20.0; r *= 1.8)
      shells.push_back(r);
    const unsigned long seed = opt.seed != 0 ? opt.seed : 12345;
    auto cert = certify_assumptions(cfg.potential, cfg.model.N, cfg.grid.L, shells,
                                    300, seed);
    report("potential V0", cert.v0.passed,
           "worst margin " + std::to_string(cert.v0.worst_margin));
    const bool growth_ok =
        cfg.potential.exempt_growth || (cert.v1.passed && cert.v2.passed);
    report("potential V1 V2", growth_ok,
           cfg.potential.exempt_growth
               ? "exempt by config"
               : "margins " + std::to_string(cert.v1.worst_margin) + ", " +
                     std::to_string(cert.v2.worst_margin));

    // Parseval on a seeded random field
    {
      auto g = GridSpec::make(cfg.model.N, 32, cfg.grid.L);
      auto f = make_random_smooth(g, seed + 1);
      const double a = charge(f), b = charge(fft(f));
      const double err = std::abs(a - b) / a;
      report("parseval", err < 1e-12, "rel err " + std::to_string(err));
    }

    // free-space Riesz Gaussian value at the origin vs the closed form
    // c S_{N-1} Gamma(theta/2) / 2
    {
      auto g = GridSpec::make(cfg.model.N, cfg.model.N == 3 ? 32 : 64, 8.0);
      auto op = RieszOperator::build(g, cfg.model.theta, RieszMode::FreeSpace);
      ScalarField f = ScalarField::zeros(g, PayloadKind::Real);
      for (std::size_t i = 0; i < f.size(); ++i) {
        auto x = g.point(i);
        double r2 = 0.0;
        for (int d = 0; d < g.dim; ++d) r2 += x[d] * x[d];
        f.data[i] = std::exp(-r2);
      }
      auto conv = op.convolve(f);
      std::array<int, 3> c0{0, 0, 0};
      for (int d = 0; d < g.dim; ++d) c0[d] = g.n / 2;
      const double got = conv.data[g.ravel(c0)].real();
      const double SN = 2.0 * std::pow(std::numbers::pi, g.dim / 2.0) /
                        std::tgamma(g.dim / 2.0);
      const double want = riesz_normalization(g.dim, cfg.model.theta) * SN * 0.5 *
                          std::tgamma(cfg.model.theta / 2.0);
      const double err = std::abs(got - want);
      report("riesz gaussian", err < 1e-3,
             "err " + std::to_string(err) + " (value " + std::to_string(got) + ")");
    }

    // grad_J against central differences on a small grid
    {
      auto g = GridSpec::make(cfg.model.N, 32, 8.0);
      auto op = RieszOperator::build(g, cfg.model.theta, RieszMode::FreeSpace);
      auto u = make_gaussian(g, {0.3, -0.2, 0.0}, 1.3);
      auto v = make_random_smooth(g, seed + 2);
      const double nv = std::sqrt(charge(v));
      for (auto& z : v.data) z /= nv;
      const double h = 1e-4;
      ScalarField up = u, um = u;
      for (std::size_t i = 0; i < u.size(); ++i) {
        up.data[i] += h * v.data[i];
        um.data[i] -= h * v.data[i];
      }
      const double fd = (J_functional(op, up, cfg.model.p) -
                         J_functional(op, um, cfg.model.p)) /
                        (2.0 * h);
      const double pairing = inner_real(grad_J(op, u, cfg.model.p), v);
      const double err = std::abs(fd - pairing) / std::max(1.0, std::abs(pairing));
      report("grad_J fd", err < 1e-5, "rel err " + std::to_string(err));
    }

    return all_ok ? 0 : 1;
  } catch (const std::exception& e) {
    return detail::fail_with_record(e);
  }
}

}  // namespace choquard
