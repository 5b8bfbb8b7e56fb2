#pragma once

// Fourier-side calculus on the torus: derivatives, Leray projection,
// Sobolev norms and the heat/Stokes semigroups.

#include "nspd/torus.hpp"

namespace nspd {

enum class Semigroup { heat, stokes };

/// Gradient of every component; output component c * dim + j is d_j f^c.
SpectralField gradient(const SpectralField& f);
/// Divergence of a dim-component field.
SpectralField divergence(const SpectralField& u);
/// Multiplier -|k|^2 on every component.
SpectralField laplacian(const SpectralField& f);

/// Orthogonal projection onto divergence-free, mean-zero fields:
/// mode k != 0 is mapped by I - k k^T / |k|^2, mode 0 is removed.
SpectralField leray_project(const SpectralField& u);

/// (sum_k (1 + |k|^2)^r |f_k|^2 (2 pi)^d)^{1/2}, summed over components.
double sobolev_norm(const SpectralField& f, double r);
inline double l2_norm(const SpectralField& f) { return sobolev_norm(f, 0.0); }
/// L^2 inner product over the torus, summed over components.
double l2_inner(const SpectralField& f, const SpectralField& g);
/// Max over native grid samples of the pointwise Euclidean norm.
double linf_norm(const SpectralField& f);

/// Max modal magnitude of k . u_k divided by ||u||_{L^2} (0 for u = 0).
double divergence_ratio(const SpectralField& u);

/// exp(-|k|^2 t) on every mode (heat); Stokes first applies leray_project.
/// Throws DomainError for t < 0.
SpectralField semigroup_apply(const SpectralField& f, double t, Semigroup which);

/// Zero every mode with some |k_j| above dealias_fraction * n / 2.
SpectralField dealias(const SpectralField& f);
void dealias_in_place(SpectralField& f);

/// Alias-free product of two scalar fields evaluated on the padded grid,
/// then truncated by `dealias`.
SpectralField multiply(const SpectralField& f, const SpectralField& g);

/// Remove the k = 0 mode.
void remove_mean(SpectralField& f);

}  // namespace nspd
