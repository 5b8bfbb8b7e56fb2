#pragma once

// Exponential-Euler splitting for the stochastic system and the trajectory
// driver with threshold stopping times.
//
// One step, in order:
//   v+ = S_stokes(dt)[v + dt Fv(y) + Q(v) dW]
//   d* = S_heat(gamma dt)[d + dt Fd(y)]
//   d+ = rotation of d* about h by the exact flow of d x h o deta   (stratonovich)
//      = d* + G(d*) deta + 1/2 G^2(d*) dt                            (ito)
//   d+ = d+ / |d+| pointwise                                         (optional)

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nspd/config.hpp"
#include "nspd/noise.hpp"
#include "nspd/nonlinear.hpp"
#include "nspd/state.hpp"

namespace nspd {

enum class RunStatus { completed, stopped_at_threshold, numerical_failure };
const char* to_string(RunStatus s);

/// One diagnostic row. Norms are V_alpha / E_alpha product norms.
struct RecordRow {
  double t = 0.0;
  double v_norm = 0.0;
  double e_norm = 0.0;
  double max_constraint_dev = 0.0;  // max_x ||d|^2 - 1|
  double y_minus = 0.0;             // ||(|d|^2 - 1)_-||^2_{L^2}
  double z_plus = 0.0;              // ||(|d|^2 - 1)_+||^2_{L^2}
  double energy = 0.0;              // ||v||^2_{L^2}
  double divergence = 0.0;          // divergence_ratio(v)
  double grad_d_linf = 0.0;         // max_x |grad d|
};

struct TrajectoryRecord {
  std::string config_hash;
  std::uint64_t trajectory = 0;
  std::vector<RecordRow> rows;
  /// First time the V_alpha norm reached each threshold (NaN if never).
  std::vector<double> tau;
  RunStatus status = RunStatus::completed;
  std::size_t steps_taken = 0;
  /// Largest values over every step, not only recorded rows.
  double max_divergence_ratio = 0.0;
  double max_constraint_dev = 0.0;
  std::optional<std::size_t> failure_step;
  std::vector<std::pair<std::size_t, SystemState>> snapshots;
};

class Integrator {
 public:
  Integrator(const SolverConfig& cfg, std::shared_ptr<const Torus> torus);
  explicit Integrator(const SolverConfig& cfg);

  const SolverConfig& config() const { return cfg_; }
  const std::shared_ptr<const Torus>& torus() const { return torus_; }
  const MagneticField& field() const { return h_; }
  const NoiseBasis& noise_basis() const { return *basis_; }

  FieldPair drift(const SystemState& y) const { return full_drift_F(y, cfg_.model); }

  SpectralField step_velocity(const SystemState& y, const SpectralField& drift_v, const NoiseIncrement& inc,
                              double dt) const;
  SpectralField step_director_deterministic(const SystemState& y, const SpectralField& drift_d, double dt) const;
  SpectralField step_director_deterministic(const SystemState& y, double dt) const;
  SpectralField step_director_noise_rotation(const SpectralField& d, double dEta) const;
  SpectralField step_director_noise_ito(const SpectralField& d, double dEta, double dt) const;
  SpectralField renormalize(const SpectralField& d) const;

  /// Full splitting step. Throws NumericalFailure(step_index) on NaN/Inf.
  void step(SystemState& y, const NoiseIncrement& inc, double dt, std::size_t step_index) const;

 private:
  SolverConfig cfg_;
  std::shared_ptr<const Torus> torus_;
  MagneticField h_;
  std::unique_ptr<NoiseBasis> basis_;
  // exp(-|k|^2 dt) and exp(-gamma |k|^2 dt) for the configured dt
  std::vector<double> decay_v_, decay_d_;
};

/// Heat semigroup of the director at rate gamma.
SpectralField director_semigroup(const SpectralField& d, double t, double gamma);

struct RunOptions {
  std::uint64_t trajectory = 0;
  /// Use this path instead of sampling; its dt must equal scheme.dt.
  const NoisePath* path = nullptr;
  /// Start from this state instead of make_initial_state.
  const SystemState* initial = nullptr;
  /// Stop at this time instead of t_max (must be a multiple of dt).
  std::optional<double> t_end;
};

RecordRow diagnose(const SystemState& y, double alpha);

/// Runs the splitting until t_max or until the V_alpha norm reaches the
/// largest threshold. Numerical failure is reported in the record and counts
/// as reaching every threshold not yet crossed.
TrajectoryRecord run_trajectory(const SolverConfig& cfg, const RunOptions& opt = {});
/// Same, also returning the final state.
TrajectoryRecord run_trajectory(const SolverConfig& cfg, const RunOptions& opt, SystemState& final_state);

}  // namespace nspd
