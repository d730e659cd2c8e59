// Command-line driver: ground-state, evolve, sweep, check.
#include <CLI11.hpp>

#include "choquard/cli.hpp"
#include "choquard/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"choquard: spectral toolkit for the generalized Choquard equation"};
  app.require_subcommand(1);

  std::string config_path;
  choquard::CliOptions opt;
  app.add_option("--config", config_path, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--seed", opt.seed, "master seed overriding the config seeds");
  app.add_option("--threads", opt.threads, "worker threads (default: cores)");
  app.add_option("--out", opt.out_override, "output directory override");

  auto* c_gs = app.add_subcommand("ground-state",
                                  "compute and certify a ground state profile");
  auto* c_ev = app.add_subcommand("evolve", "propagate initial data, write the "
                                            "trajectory CSV");
  auto* c_sw = app.add_subcommand("sweep", "epsilon sweep with shared profile");
  auto* c_ck = app.add_subcommand("check", "validate params, certify the "
                                           "potential, run the smoke suite");

  CLI11_PARSE(app, argc, argv);

  try {
    choquard::ExperimentConfig cfg = choquard::load_config(config_path);
    if (c_gs->parsed()) return choquard::cmd_ground_state(cfg, opt);
    if (c_ev->parsed()) return choquard::cmd_evolve(cfg, opt);
    if (c_sw->parsed()) return choquard::cmd_sweep(cfg, opt);
    if (c_ck->parsed()) return choquard::cmd_check(cfg, opt);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
