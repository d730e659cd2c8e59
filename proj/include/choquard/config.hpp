#pragma once

#include <fstream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "choquard/dynamics.hpp"
#include "choquard/grid.hpp"
#include "choquard/params.hpp"
#include "choquard/potential.hpp"

namespace choquard {

using json = nlohmann::ordered_json;

inline constexpr const char* kConfigSchema = "choquard-config/1";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  ModelParams model;                    // alpha, beta derived from gamma
  GridSpec grid{2, 128, 8.0};           // evolution grid
  std::optional<GridSpec> profile_grid; // flow grid; defaults to `grid`
  PotentialSpec potential;
  struct Flow {
    double dtau = 0.0;
    double tol = 1e-8;
    long max_iters = 200000;
    double nu = 1.0;
    double seed_width = 0.0;
    unsigned long perturb_seed = 0;
    bool sigma_mode = false;  // re-run with nu = sigma(E_omega) once
  } flow;
  struct Evolve {
    double T = 1.0;
    double c_t = 0.5;
    long callback_stride = 1;
  } evolve;
  struct Sweep {
    std::vector<double> eps;
    std::vector<int> n;  // optional per-member grid sizes
  } sweep;
  struct Diagnostics {
    double lambda = 0.01;
    double rhat_halfwidths = 8.0;
  } diag;
  RieszMode mode = RieszMode::FreeSpace;
  struct Output {
    std::string directory = "out";
    long snapshot_stride = 0;
  } output;

  GridSpec flow_grid() const { return profile_grid.value_or(grid); }
};

namespace detail {

inline const json& require_key(const json& j, const std::string& key,
                               const std::string& path) {
  auto it = j.find(key);
  if (it == j.end())
    throw ConfigError("config: missing key '" + path + key + "'");
  return *it;
}

template <typename T>
T get_as(const json& j, const std::string& key, const std::string& path) {
  try {
    return require_key(j, key, path).get<T>();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("config: bad value at '" + path + key + "': " + e.what());
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, const std::string& path, T dflt) {
  if (j.find(key) == j.end()) return dflt;
  return get_as<T>(j, key, path);
}

inline GridSpec parse_grid(const json& j, const std::string& path) {
  return GridSpec::make(get_as<int>(j, "dim", path), get_as<int>(j, "n", path),
                        get_as<double>(j, "L", path));
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& root) {
  using detail::get_as;
  using detail::get_or;
  ExperimentConfig cfg;
  const std::string schema = get_as<std::string>(root, "schema", "");
  if (schema != kConfigSchema)
    throw ConfigError("config: unsupported schema '" + schema + "' (expected " +
                      std::string(kConfigSchema) + ")");

  const json& m = detail::require_key(root, "model", "");
  {
    const int N = get_as<int>(m, "N", "model.");
    const double theta = get_as<double>(m, "theta", "model.");
    const double p = get_as<double>(m, "p", "model.");
    const double mass = get_as<double>(m, "m", "model.");
    const double omega = get_as<double>(m, "omega", "model.");
    const double eps = get_as<double>(m, "eps", "model.");
    const double gamma = get_as<double>(m, "gamma", "model.");
    auto vv = get_as<std::vector<double>>(m, "v", "model.");
    if (static_cast<int>(vv.size()) != N)
      throw ConfigError("config: model.v must have N entries");
    Vec3 v{0.0, 0.0, 0.0};
    for (int d = 0; d < N; ++d) v[d] = vv[d];
    cfg.model = make_params(N, theta, p, gamma, eps, omega, mass, v);
  }

  cfg.grid = detail::parse_grid(detail::require_key(root, "grid", ""), "grid.");
  if (cfg.grid.dim != cfg.model.N)
    throw ConfigError("config: grid.dim must equal model.N");
  if (root.contains("profile_grid"))
    cfg.profile_grid = detail::parse_grid(root["profile_grid"], "profile_grid.");

  const json& pj = detail::require_key(root, "potential", "");
  {
    const std::string kind = get_as<std::string>(pj, "kind", "potential.");
    const json coeff = pj.contains("coefficients") ? pj["coefficients"] : json::object();
    if (kind == "zero") {
      cfg.potential = PotentialSpec::zero();
    } else if (kind == "harmonic") {
      cfg.potential = PotentialSpec::harmonic(
          get_or<double>(coeff, "c2", "potential.coefficients.", 1.0));
    } else if (kind == "quartic_anharmonic") {
      cfg.potential = PotentialSpec::quartic(
          get_or<double>(coeff, "c2", "potential.coefficients.", 1.0),
          get_or<double>(coeff, "c4", "potential.coefficients.", 0.1));
    } else if (kind == "power_law") {
      cfg.potential = PotentialSpec::power_law(
          get_or<double>(coeff, "c", "potential.coefficients.", 1.0),
          get_or<double>(coeff, "s", "potential.coefficients.", 1.0));
    } else {
      throw ConfigError("config: unknown potential.kind '" + kind + "'");
    }
    cfg.potential.a = get_or<double>(pj, "a", "potential.", cfg.potential.a);
    cfg.potential.b = get_or<double>(pj, "b", "potential.", cfg.potential.b);
    cfg.potential.R1 = get_or<double>(pj, "R1", "potential.", cfg.potential.R1);
    cfg.potential.exempt_growth =
        get_or<bool>(pj, "exempt_growth", "potential.", cfg.potential.exempt_growth);
  }

  if (root.contains("flow")) {
    const json& f = root["flow"];
    cfg.flow.dtau = get_or<double>(f, "dtau", "flow.", 0.0);
    cfg.flow.tol = get_or<double>(f, "tol", "flow.", 1e-8);
    cfg.flow.max_iters = get_or<long>(f, "max_iters", "flow.", 200000);
    cfg.flow.nu = get_or<double>(f, "nu", "flow.", 1.0);
    cfg.flow.seed_width = get_or<double>(f, "seed_width", "flow.", 0.0);
    cfg.flow.perturb_seed = get_or<unsigned long>(f, "perturb_seed", "flow.", 0);
    cfg.flow.sigma_mode = get_or<bool>(f, "sigma_mode", "flow.", false);
  }
  if (root.contains("evolve")) {
    const json& e = root["evolve"];
    cfg.evolve.T = get_or<double>(e, "T", "evolve.", 1.0);
    cfg.evolve.c_t = get_or<double>(e, "c_t", "evolve.", 0.5);
    cfg.evolve.callback_stride = get_or<long>(e, "callback_stride", "evolve.", 1);
  }
  if (root.contains("sweep")) {
    const json& s = root["sweep"];
    cfg.sweep.eps = get_or<std::vector<double>>(s, "eps", "sweep.", {});
    cfg.sweep.n = get_or<std::vector<int>>(s, "n", "sweep.", {});
  }
  if (root.contains("diagnostics")) {
    const json& d = root["diagnostics"];
    cfg.diag.lambda = get_or<double>(d, "lambda", "diagnostics.", 0.01);
    cfg.diag.rhat_halfwidths =
        get_or<double>(d, "rhat_halfwidths", "diagnostics.", 8.0);
  }
  if (root.contains("riesz")) {
    const std::string mode = get_or<std::string>(root["riesz"], "mode", "riesz.",
                                                 "free_space");
    if (mode == "free_space")
      cfg.mode = RieszMode::FreeSpace;
    else if (mode == "periodic")
      cfg.mode = RieszMode::Periodic;
    else
      throw ConfigError("config: unknown riesz.mode '" + mode + "'");
  }
  if (root.contains("output")) {
    const json& o = root["output"];
    cfg.output.directory = get_or<std::string>(o, "directory", "output.", "out");
    cfg.output.snapshot_stride = get_or<long>(o, "snapshot_stride", "output.", 0);
  }
  return cfg;
}

inline json to_json(const ExperimentConfig& cfg) {
  json root;
  root["schema"] = kConfigSchema;
  json m;
  m["N"] = cfg.model.N;
  m["theta"] = cfg.model.theta;
  m["p"] = cfg.model.p;
  m["m"] = cfg.model.m;
  m["omega"] = cfg.model.omega;
  m["eps"] = cfg.model.eps;
  m["gamma"] = cfg.model.gamma;
  std::vector<double> v(cfg.model.v.begin(), cfg.model.v.begin() + cfg.model.N);
  m["v"] = v;
  root["model"] = m;
  root["grid"] = {{"dim", cfg.grid.dim}, {"n", cfg.grid.n}, {"L", cfg.grid.L}};
  if (cfg.profile_grid)
    root["profile_grid"] = {{"dim", cfg.profile_grid->dim},
                            {"n", cfg.profile_grid->n},
                            {"L", cfg.profile_grid->L}};
  json pj;
  switch (cfg.potential.kind) {
    case PotentialKind::Zero:
      pj["kind"] = "zero";
      break;
    case PotentialKind::Harmonic:
      pj["kind"] = "harmonic";
      pj["coefficients"] = {{"c2", cfg.potential.c2}};
      break;
    case PotentialKind::QuarticAnharmonic:
      pj["kind"] = "quartic_anharmonic";
      pj["coefficients"] = {{"c2", cfg.potential.c2}, {"c4", cfg.potential.c4}};
      break;
    case PotentialKind::PowerLaw:
      pj["kind"] = "power_law";
      pj["coefficients"] = {{"c", cfg.potential.cpl}, {"s", cfg.potential.s}};
      break;
  }
  pj["a"] = cfg.potential.a;
  pj["b"] = cfg.potential.b;
  pj["R1"] = cfg.potential.R1;
  pj["exempt_growth"] = cfg.potential.exempt_growth;
  root["potential"] = pj;
  root["flow"] = {{"dtau", cfg.flow.dtau},
                  {"tol", cfg.flow.tol},
                  {"max_iters", cfg.flow.max_iters},
                  {"nu", cfg.flow.nu},
                  {"seed_width", cfg.flow.seed_width},
                  {"perturb_seed", cfg.flow.perturb_seed},
                  {"sigma_mode", cfg.flow.sigma_mode}};
  root["evolve"] = {{"T", cfg.evolve.T},
                    {"c_t", cfg.evolve.c_t},
                    {"callback_stride", cfg.evolve.callback_stride}};
  root["sweep"] = {{"eps", cfg.sweep.eps}, {"n", cfg.sweep.n}};
  root["diagnostics"] = {{"lambda", cfg.diag.lambda},
                         {"rhat_halfwidths", cfg.diag.rhat_halfwidths}};
  root["riesz"] = {
      {"mode", cfg.mode == RieszMode::FreeSpace ? "free_space" : "periodic"}};
  root["output"] = {{"directory", cfg.output.directory},
                    {"snapshot_stride", cfg.output.snapshot_stride}};
  return root;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  json root;
  try {
    is >> root;
  } catch (const std::exception& e) {
    throw ConfigError("config: parse failure in " + path + ": " + e.what());
  }
  return parse_config(root);
}

}  // namespace choquard
