// nspd: command-line front end.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "nspd/config.hpp"
#include "nspd/error.hpp"
#include "nspd/runner.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> out;
  std::optional<std::size_t> snapshots_every;
  std::optional<std::size_t> n_traj;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "config file (key = value sections)");
  sub->add_option("--seed", f.seed, "noise seed");
  sub->add_option("--out", f.out, "output directory");
}

nspd::SolverConfig load(const Flags& f) {
  nspd::SolverConfig cfg = f.config.empty() ? nspd::SolverConfig{} : nspd::load_config_file(f.config);
  cfg = nspd::apply_overrides(cfg, {f.seed, f.out, f.snapshots_every, f.n_traj});
  nspd::validate_config(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic simplified Ericksen-Leslie solver on the periodic box"};
  app.require_subcommand(1);
  Flags f;

  auto* sim = app.add_subcommand("simulate", "run one trajectory");
  add_common(sim, f);
  sim->add_option("--snapshots-every", f.snapshots_every, "write field snapshots every N steps (0 = off)");

  auto* ens = app.add_subcommand("ensemble", "run many trajectories and aggregate survival curves");
  add_common(ens, f);
  ens->add_option("--workers", f.workers, "parallel workers (default $NSPD_WORKERS or 1)");
  ens->add_option("--n-traj", f.n_traj, "number of trajectories");
  ens->add_option("--snapshots-every", f.snapshots_every, "write field snapshots every N steps (0 = off)");

  auto* conv = app.add_subcommand("convergence", "strong error and constraint drift over dt halvings");
  add_common(conv, f);

  auto* chk = app.add_subcommand("check", "run the invariant and estimate suites");
  add_common(chk, f);

  auto* defaults = app.add_subcommand("print-defaults", "print the default config with comments");

  CLI11_PARSE(app, argc, argv);

  try {
    if (defaults->parsed()) {
      std::cout << nspd::serialize_config(nspd::SolverConfig{}, true);
      return 0;
    }
    const nspd::SolverConfig cfg = load(f);
    if (sim->parsed()) return nspd::cmd_simulate(cfg, std::cout);
    if (ens->parsed()) return nspd::cmd_ensemble(cfg, nspd::resolve_workers(f.workers), std::cout);
    if (conv->parsed()) return nspd::cmd_convergence(cfg, std::cout);
    if (chk->parsed()) return nspd::cmd_check(cfg, std::cout);
  } catch (const nspd::ValidationError& e) {
    for (const auto& v : e.violations())
      std::cerr << "invalid " << v.field << ": " << v.constraint << " (got " << v.value << ")\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
