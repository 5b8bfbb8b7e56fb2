#pragma once

// Orchestration behind the command-line tool: single runs, ensembles,
// convergence sweeps and the invariant-check battery.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "nspd/config.hpp"
#include "nspd/diagnostics.hpp"
#include "nspd/integrators.hpp"

namespace nspd {

/// Command-line values that take precedence over the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> snapshots_every;
  std::optional<std::size_t> n_traj;
};
SolverConfig apply_overrides(SolverConfig cfg, const Overrides& o);

/// --workers if given, else NSPD_WORKERS, else 1.
std::size_t resolve_workers(std::optional<std::size_t> flag);

/// 0 completed, 2 stopped at threshold, 3 numerical failure.
int exit_code(RunStatus s);

/// Writes trajectory.csv, summary.csv, config.ini and snapshots/ under
/// output.dir. Returns the exit code; I/O errors give 1.
int cmd_simulate(const SolverConfig& cfg, std::ostream& log);

struct EnsembleResult {
  std::vector<TrajectoryRecord> records;  // in trajectory order
  std::vector<double> amplitudes;
  std::vector<SurvivalCurve> curves;      // pooled first, then per amplitude
};

/// Trajectory i runs with initial amplitudes scaled by
/// amplitudes[i % size] and noise keyed by i.
EnsembleResult run_ensemble(const SolverConfig& cfg, std::size_t workers);
/// Writes traj_NNNNNN.csv, ensemble_summary.csv, survival.csv and
/// config.ini. Exit code is the most severe trajectory status.
int cmd_ensemble(const SolverConfig& cfg, std::size_t workers, std::ostream& log);

/// Writes convergence.csv and convergence_slopes.csv.
int cmd_convergence(const SolverConfig& cfg, std::ostream& log);

struct SuiteResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Property battery on cfg. Every suite is reported even after a failure.
std::vector<SuiteResult> run_checks(const SolverConfig& cfg);
/// Prints one line per suite; exit 0 iff all pass, 4 otherwise.
int cmd_check(const SolverConfig& cfg, std::ostream& log);

}  // namespace nspd
