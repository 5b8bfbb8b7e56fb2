#pragma once

// Truncated cylindrical Wiener noise for the velocity, the scalar Brownian
// motion driving the director, and the velocity noise coefficient Q.

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "nspd/config.hpp"
#include "nspd/torus.hpp"

namespace nspd {

/// splitmix64 finalizer; used to derive independent engine seeds from
/// (seed, trajectory, step, ...) keys.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

/// Standard normal stream seeded from a key. Same key, same numbers.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t key) : engine_(key) {}
  double operator()() { return dist_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

struct NoiseIncrement {
  std::vector<double> dW;  // one entry per velocity noise mode, each N(0, dt)
  double dEta = 0.0;       // N(0, dt)
};

/// Increment for step `step` of trajectory `traj`; a pure function of
/// (seed, traj, step). Throws DomainError for dt <= 0.
NoiseIncrement sample_increment(std::uint64_t step, double dt, const NoiseConfig& cfg, std::uint64_t traj = 0);

/// Real divergence-free basis psi_j, orthonormal in L^2: for each retained
/// wavevector k in the half lattice (ordered by |k|^2, then lexically) and
/// each unit polarization e perpendicular to k, the pair
/// e cos(k.x) / c, e sin(k.x) / c with c^2 = (2 pi)^d / 2.
class NoiseBasis {
 public:
  /// Throws ConfigError if n_modes exceeds the available basis size or the
  /// decay exponent does not exceed alpha + dim / 2.
  NoiseBasis(std::shared_ptr<const Torus> torus, const NoiseConfig& cfg, double alpha);

  std::size_t size() const { return entries_.size(); }
  const Wavevector& wavevector(std::size_t j) const { return entries_[j].k; }
  /// q_j = sigma (1 + |k_j|^2)^(-decay_s / 2)
  double q(std::size_t j) const { return entries_[j].q; }
  double alpha() const { return alpha_; }
  double gain() const { return gain_; }

  /// The unit basis field psi_j.
  SpectralField basis_field(std::size_t j) const;

  /// rho(v) = ||v||_{H^alpha} / (1 + ||v||_{H^alpha}).
  double rho(const SpectralField& v) const;

  /// sum_j q_j (1 + gain rho(v)) dW_j psi_j.
  SpectralField apply(const SpectralField& v, const std::vector<double>& dW) const;
  /// Same with a precomputed factor (1 + gain rho).
  SpectralField apply_scaled(double factor, const std::vector<double>& dW) const;

  /// ||Q(v)||^2 in L_2(K_1, H^alpha), closed form.
  double hs_norm_squared(const SpectralField& v) const;
  /// Growth constant l0 with ||Q(v)||^2_HS <= l0 (1 + ||v||^2_{H^alpha}).
  double ell0() const;
  /// Lipschitz constant L with ||Q(v1) e - Q(v2) e|| <= L ||v1 - v2|| ||e||.
  double lipschitz() const;
  /// Total number of basis fields available on this grid.
  static std::size_t available(const Torus& torus);

 private:
  struct Entry {
    Wavevector k;
    std::size_t index;   // half-spectrum slot
    bool conjugated;     // stored slot holds -k
    std::array<Complex, 3> amp;  // coefficient vector on exp(i k.x)
    double q;
    double k2;
  };
  std::shared_ptr<const Torus> torus_;
  std::vector<Entry> entries_;
  double alpha_;
  double gain_;
};

inline SpectralField apply_Q(const NoiseBasis& basis, const SpectralField& v, const NoiseIncrement& inc) {
  return basis.apply(v, inc.dW);
}

/// Increments of one Brownian path on a uniform grid.
struct NoisePath {
  double dt = 0.0;
  std::size_t n_modes = 0;
  std::uint64_t key = 0;  // identifies the path for bridge refinement
  int level = 0;          // number of halvings applied so far
  std::vector<NoiseIncrement> steps;

  std::size_t size() const { return steps.size(); }
};

/// Increments for steps [0, n_steps) from sample_increment.
NoisePath generate_path(const NoiseConfig& cfg, double dt, std::size_t n_steps, std::uint64_t traj = 0);

/// Brownian-bridge refinement by a power-of-two factor. Every halving splits
/// an increment D over dt into D/2 + s Z, D/2 - s Z with s = sqrt(dt)/2,
/// so sums over the coarse intervals are preserved and refined increments
/// have variance dt/2. Repeated calls compose: refine(refine(p, 2), 2)
/// equals refine(p, 4). Throws DomainError otherwise.
NoisePath brownian_bridge_refine(const NoisePath& path, std::size_t factor);

/// Sums consecutive groups of `factor` increments.
NoisePath coarsen(const NoisePath& path, std::size_t factor);

}  // namespace nspd
