#pragma once

// Mild formulation on a uniform time grid: deterministic and stochastic
// convolutions with the linear semigroup, the X_T path norm, and Picard
// iteration of u = S y0 + S*(drift(u)) + S<>(noise(u)).
//
// Both convolutions use the left-endpoint rule, so the stochastic sum stays
// non-anticipating. Paths hold samples at t_n = n dt, n = 0..N.

#include <vector>

#include "nspd/integrators.hpp"
#include "nspd/noise.hpp"
#include "nspd/state.hpp"

namespace nspd {

using PairPath = std::vector<FieldPair>;

/// S(t) on a pair: Stokes semigroup on v, heat semigroup at rate gamma on d.
FieldPair semigroup_pair(const FieldPair& y, double t, double gamma);

/// (sup_n ||u_n||^2_V + trapezoid of ||u_n||^2_E)^(1/2) over [0, N dt].
double xt_norm(const PairPath& u, double dt, double alpha);
/// (sum_n dt ||f_n||^2_H)^(1/2) over the left endpoints n = 0..N-1.
double l2_time_norm(const PairPath& f, double dt, double alpha);

/// u_n = sum_{j<n} S(t_n - t_j) f_j dt, n = 0..N, for f with N or N+1
/// samples. Throws DomainError on an empty path.
PairPath convolution_S_star(const PairPath& f, double dt, double gamma);

/// u_n = sum_{j<n} sum_k S(t_n - t_j) xi_{j,k} dW_{j,k}. xi has N or N+1
/// time samples, dW exactly N; the inner sizes must agree. Throws
/// DomainError otherwise.
PairPath convolution_S_diamond(const std::vector<std::vector<FieldPair>>& xi,
                               const std::vector<std::vector<double>>& dW, double dt, double gamma);

struct PicardResult {
  std::vector<double> residuals;  // r_m = |u^{m+1} - u^m|_{X_T}
  PairPath fixed_point;           // last iterate
  double mild_residual = 0.0;     // |u - Phi(u)|_{X_T} for the last iterate
  bool diverged = false;
};

/// Picard iteration on [0, n_steps * path.dt] against a fixed noise path.
/// The drift is the Ito form F + 1/2 G^2 of the director equation.
/// Stops early when a residual exceeds 1e3 times the first (diverged).
PicardResult picard_iterate_mild(const Integrator& integ, const SystemState& y0, const NoisePath& path,
                                 std::size_t n_steps, std::size_t n_iters);

}  // namespace nspd
