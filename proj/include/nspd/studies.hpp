#pragma once

// Convergence and consistency studies shared by the CLI and the test suites.

#include <cstdint>
#include <vector>

#include "nspd/config.hpp"
#include "nspd/nonlinear.hpp"

namespace nspd {

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct WeakConsistency {
  std::vector<double> dt;
  std::vector<double> difference;  // E d3 (rotation) - E d3 (Ito form)
  std::vector<double> std_error;
  double slope = 0.0;  // of |difference| against dt
};

/// Single-point director model d' = d x h o deta with h = e1, d(0) = e3,
/// observable f(d) = d3. Both schemes share every Brownian path; coarse
/// increments are sums of the finest ones. The estimator subtracts the
/// control variate d3_rot(T) * sum_n (deta_n^2 - dt), whose mean
/// -T dt exp(-T/2) is known in closed form for this model.
WeakConsistency weak_consistency_study(std::size_t n_paths, const std::vector<std::size_t>& steps, double t_end,
                                       std::uint64_t seed, double correction_sign = 1.0);

struct ConvergenceReport {
  std::vector<double> dt;
  std::vector<double> strong_error;      // RMS over paths of |y_dt(T) - y_ref(T)|_V
  std::vector<double> constraint_drift;  // mean over paths of max_x ||d(T)|^2 - 1|
  double reference_dt = 0.0;
  double strong_slope = 0.0;
  double drift_slope = 0.0;
  std::size_t paths = 0;
};

/// Runs cfg over convergence.dt_list up to scheme.t_max. Each path draws
/// its increments at the coarsest dt and refines them by Brownian bridges,
/// so every resolution (and the reference at dt_min / reference_refinement)
/// sees the same Brownian path. Throws NumericalFailure if any run fails.
ConvergenceReport convergence_study(const SolverConfig& cfg);

struct PicardAgreement {
  std::vector<double> dt;
  std::vector<double> difference;  // RMS over paths of max_n |u_n - y_n|_V
  double slope = 0.0;
  std::vector<double> residuals;   // residuals of the first path at the finest dt
  double worst_mild_residual = 0.0;
  double worst_contraction = 0.0;  // max over runs of r_5 / r_1
  bool diverged = false;
};

/// Compares the Picard fixed point of the mild equation with the Ito-form
/// splitting on the same bridge-refined noise paths, on [0, t_end].
PicardAgreement picard_agreement(const SolverConfig& cfg, double t_end, const std::vector<double>& dt_list,
                                 std::size_t paths, std::size_t n_iters);

}  // namespace nspd
