#pragma once

// Sphere-constraint energies, the Psi_ell functional, vector identities,
// estimate-ratio suites and stopping-time statistics.

#include <cstdint>
#include <string>
#include <vector>

#include "nspd/integrators.hpp"
#include "nspd/torus.hpp"

namespace nspd {

struct ConstraintReport {
  double t = 0.0;
  double max_pointwise_dev = 0.0;
  double y_minus = 0.0;
  double z_plus = 0.0;
};

/// Evaluates |d|^2 - 1 on the native grid; L^2 integrals use the
/// rectangle rule (exact for band-limited integrands).
ConstraintReport constraint_report(const SpectralField& d, double t = 0.0);

/// Cut-off phi: -1 on (-inf, -2], 0 on [-1, inf), quintic smoothstep between.
double mollifier_phi(double s);
/// int (|d|^2 - 1)^2 |phi(ell (|d|^2 - 1))| dx. Throws DomainError for ell < 1.
double psi_ell(const SpectralField& d, double ell);

struct IdentityResiduals {
  double gradient = 0.0;   // max_x |grad|d|^2 - 2 (grad d)^T d|
  double laplacian = 0.0;  // max_x |Lap|d|^2 - 2 Lap d . d - 2 |grad d|^2|
};
IdentityResiduals vector_identity_checks(const SpectralField& d);

/// Exponent used with the first bilinear estimate: (alpha - dim/2)/2 clamped into (0, 1).
double estimate_delta(double alpha, int dim);

struct RatioSuite {
  double est_convective = 0.0;   // ||B(u,v)||_{a-1} bound
  double est_director = 0.0;     // ||Btilde(v,d)||_a bound
  double est_stress = 0.0;       // ||M(d,m)||_{a-1} bound
  double est_ginzburg = 0.0;     // difference of |grad d|^2 d
  double est_product = 0.0;      // fractional product rule constant c0
  double est_semigroup = 0.0;    // smoothing constant M
  double est_drift = 0.0;        // Lipschitz-type bound on the full drift
  std::size_t skipped = 0;
  std::size_t samples = 0;
  bool all_finite() const;
  double max_ratio() const;
};

/// Random band-limited samples on `grid`; max LHS/RHS per estimate. Samples
/// whose right side vanishes are skipped. The Taylor-Green / planar-director
/// pair is always included as one of the samples.
RatioSuite lemma_ratio_suite(std::size_t n_samples, double alpha, std::uint64_t seed, const Grid& grid);

/// Individual ratios, exposed for homogeneity checks.
double ratio_convective(const SpectralField& u, const SpectralField& v, double alpha);
double ratio_director(const SpectralField& v, const SpectralField& d, double alpha);
double ratio_stress(const SpectralField& d, const SpectralField& m, double alpha);
double ratio_ginzburg(const SpectralField& d, const SpectralField& m, double alpha);
double ratio_product(const SpectralField& f, const SpectralField& g, double s);

/// Random band-limited fields (max |k_j| <= band) with coefficients decaying
/// like (1 + |k|^2)^(-decay/2); `solenoidal` applies the Leray projection.
SpectralField random_field(const std::shared_ptr<const Torus>& torus, int components, int band, double decay,
                           std::uint64_t key, bool solenoidal = false);

enum class LifespanStatus { completed, stopped, failed };
const char* to_string(LifespanStatus s);

struct LifespanSample {
  std::uint64_t trajectory = 0;
  double amplitude = 1.0;
  std::vector<double> tau;  // NaN when not crossed
  LifespanStatus status = LifespanStatus::completed;
};

/// First sample time at which norms reach each threshold. Status is
/// stopped iff the largest threshold is reached before t_max.
LifespanSample blowup_monitor(const std::vector<double>& t, const std::vector<double>& norms,
                              const std::vector<double>& thresholds, double t_max);
/// From a trajectory record, using the per-step crossings it carries.
LifespanSample blowup_monitor(const TrajectoryRecord& rec);

struct SurvivalCurve {
  double amplitude = 0.0;  // NaN for the pooled curve
  std::size_t n = 0;
  std::vector<double> t;
  std::vector<double> survival;
  std::vector<double> lower;
  std::vector<double> upper;
};

/// Wilson score interval for k successes out of n at z = 1.96.
std::pair<double, double> wilson_interval(std::size_t k, std::size_t n, double z = 1.96);

/// Empirical P(tau_top >= t) on t_grid, where tau_top is the crossing of the
/// largest threshold (infinite if never crossed). Throws DomainError when
/// `samples` is empty.
SurvivalCurve lifespan_statistics(const std::vector<LifespanSample>& samples, const std::vector<double>& t_grid);
/// One curve per distinct amplitude, in increasing amplitude order.
std::vector<SurvivalCurve> lifespan_by_amplitude(const std::vector<LifespanSample>& samples,
                                                 const std::vector<double>& t_grid);

}  // namespace nspd
