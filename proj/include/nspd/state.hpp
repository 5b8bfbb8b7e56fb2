#pragma once

// The (velocity, director) state, its initial data and the product-space
// norms H_alpha, V_alpha, E_alpha.

#include <memory>
#include <vector>

#include "nspd/config.hpp"
#include "nspd/torus.hpp"

namespace nspd {

struct SystemState {
  double time = 0.0;
  SpectralField v;  // dim components, divergence-free, mean zero
  SpectralField d;  // 3 components
};

/// Velocity/director pair without a time stamp, used for drifts and for
/// the mild-formulation paths.
struct FieldPair {
  SpectralField v;
  SpectralField d;

  FieldPair& operator+=(const FieldPair& o);
  FieldPair& operator-=(const FieldPair& o);
  FieldPair& operator*=(double s);
  FieldPair& axpy(double s, const FieldPair& o);
};

FieldPair operator-(FieldPair a, const FieldPair& b);
FieldPair zero_pair(const Torus& torus);
inline FieldPair as_pair(const SystemState& y) { return {y.v, y.d}; }

enum class SpaceLevel { H, V, E };

struct SpaceTag {
  SpaceLevel level = SpaceLevel::V;
  double alpha = 2.0;
};

/// ||v||^2_{H^a} + ||d||^2_{H^{a+1}} with a = alpha - 1, alpha, alpha + 1 for
/// H, V, E, square-rooted. Throws DomainError unless alpha > dim / 2.
double product_norm(const FieldPair& y, const SpaceTag& tag);
inline double product_norm(const SystemState& y, const SpaceTag& tag) {
  return product_norm(FieldPair{y.v, y.d}, tag);
}

/// Taylor-Green velocity of unit amplitude: (sin x1 cos x2, -cos x1 sin x2)
/// in 2D, with an extra cos x3 factor and zero third component in 3D.
SpectralField taylor_green(const std::shared_ptr<const Torus>& torus);

/// Smooth perturbation added to e3 before normalizing the initial director.
PhysicalField director_perturbation(const Torus& torus);

/// v0 = A * Taylor-Green, d0 = (e3 + eps p) / |e3 + eps p| on the grid.
/// Throws ConfigError when |e3 + eps p| < 1e-8 somewhere.
SystemState make_initial_state(const std::shared_ptr<const Torus>& torus, const InitialData& init);

/// Divergence/mean checks on the velocity.
bool is_solenoidal(const SpectralField& v, double tol = 1e-12);

struct PathNorm {
  double sup_term = 0.0;
  double integral_term = 0.0;
  double total() const { return sup_term + integral_term; }
};

/// sup of squared V norms plus trapezoidal integral of squared E norms over
/// samples (t_i, v_i, e_i). A single sample is held constant up to t_end.
/// Throws DomainError on an empty series.
PathNorm path_norm_accumulate(const std::vector<double>& t, const std::vector<double>& v_norm,
                              const std::vector<double>& e_norm, double t_end);

}  // namespace nspd
