#pragma once

// Experiment configuration and its flat, sectioned key = value text form.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nspd/torus.hpp"

namespace nspd {

enum class NoiseVariant { stratonovich_rotation, ito_plus_correction };

struct SchemeSpec {
  NoiseVariant variant = NoiseVariant::stratonovich_rotation;
  bool renormalize_director = false;
  double dt = 1e-3;
  double t_max = 1.0;

  std::size_t steps() const;
};

/// Coupling constants and term switches of the simplified Ericksen-Leslie
/// model. Disabling every term leaves the linear Stokes/heat problem.
struct ModelParams {
  double alpha = 2.0;
  double lambda = 1.0;  // Ericksen stress coupling
  double gamma = 1.0;   // director relaxation rate
  bool convection = true;
  bool stress = true;
  bool director_convection = true;
  bool ginzburg = true;
};

struct NoiseConfig {
  std::size_t n_modes = 8;
  double sigma = 0.05;
  double decay_s = 4.0;
  double multiplicative_gain = 0.0;
  std::uint64_t seed = 1;
};

/// One trigonometric term a_cos cos(k.x) + a_sin sin(k.x) in component `component`.
struct FieldMode {
  int component = 0;
  Wavevector k{0, 0, 0};
  double a_cos = 0.0;
  double a_sin = 0.0;
  bool operator==(const FieldMode&) const = default;
};

/// Smooth applied field h: a constant vector plus trigonometric terms.
struct MagneticFieldSpec {
  std::array<double, 3> constant{0.0, 0.0, 1.0};
  std::vector<FieldMode> modes{FieldMode{0, {0, 1, 0}, 0.5, 0.0}};
  /// +1 realizes G(d) = d x h, -1 realizes G(d) = h x d.
  int cross_sign = 1;
  bool is_zero() const;
};

struct InitialData {
  double taylor_green_amplitude = 0.1;
  double director_epsilon = 0.1;
};

struct OutputSpec {
  std::string dir = "out";
  std::size_t record_stride = 1;
  std::size_t snapshot_stride = 0;
};

struct EnsembleSpec {
  /// Initial-data amplitudes R; trajectory i uses amplitudes[i % size] as a
  /// multiplier of both initial amplitudes.
  std::vector<double> amplitudes{1.0};
  std::size_t n_traj = 16;
  std::vector<double> survival_times{};
};

struct ConvergenceSpec {
  std::vector<double> dt_list{4e-3, 2e-3, 1e-3, 5e-4};
  std::size_t reference_refinement = 4;
  std::size_t paths = 4;
};

/// Test hooks. Never set outside harness checks.
struct DebugHooks {
  double ito_correction_sign = 1.0;
};

struct SolverConfig {
  Grid grid;
  ModelParams model;
  SchemeSpec scheme;
  NoiseConfig noise;
  MagneticFieldSpec field;
  InitialData initial;
  std::vector<double> thresholds{20.0, 40.0, 80.0};
  OutputSpec output;
  EnsembleSpec ensemble;
  ConvergenceSpec convergence;
  DebugHooks debug;
};

struct Violation {
  std::string field;
  std::string constraint;
  std::string value;
};

/// Thrown by parse_config / validate_config; carries every violation found.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<Violation> v);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

/// Collects every constraint violation of a config (empty when valid).
std::vector<Violation> check_config(const SolverConfig& cfg);
/// Throws ValidationError when check_config reports anything.
void validate_config(const SolverConfig& cfg);

/// Parses the sectioned key = value format; missing keys take defaults.
SolverConfig parse_config(const std::string& text);
/// Canonical text form; parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const SolverConfig& cfg, bool with_comments = false);
/// FNV-1a hash of the canonical form without the [output] section, as hex.
std::string config_hash(const SolverConfig& cfg);

SolverConfig load_config_file(const std::string& path);

const char* to_string(NoiseVariant v);

}  // namespace nspd
