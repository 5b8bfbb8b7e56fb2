#pragma once

// Nonlinear drift and noise coefficients of the simplified Ericksen-Leslie
// system. Quadratic and cubic products are formed on the padded grid and
// truncated to the retained band; G and L act pointwise on the native grid.
//
// Sign ledger (right-hand-side convention, the linear parts -A v and
// -gamma A_2 d are handled by the integrators):
//   velocity drift = -B(v, v) + lambda M(d, d)
//                  = -Pi((v.grad) v) - lambda Pi(div(grad d (.) grad d))
//   director drift = -Btilde(v, d) + gamma |grad d|^2 d
// Each term can be switched off through ModelParams.

#include <array>

#include "nspd/config.hpp"
#include "nspd/state.hpp"
#include "nspd/torus.hpp"

namespace nspd {

/// The applied field h in spectral and in native-grid form.
struct MagneticField {
  SpectralField h;       // 3 components
  PhysicalField samples; // h on the native grid
  int cross_sign = 1;    // G(d) = cross_sign * d x h

  bool is_zero() const;
};

MagneticField make_magnetic_field(const std::shared_ptr<const Torus>& torus, const MagneticFieldSpec& spec);
/// h built directly from samples (tests, synthetic fields).
MagneticField make_magnetic_field(const SpectralField& h, int cross_sign = 1);

/// B(u, v) = Pi((u.grad) v). Throws PreconditionError if u is not
/// solenoidal (divergence ratio above 1e-10).
SpectralField convective_B(const SpectralField& u, const SpectralField& v);
/// M(d, m) = -Pi(div(grad d (.) grad m)), (grad d (.) grad m)_ij = sum_k d_i d^k d_j m^k.
SpectralField ericksen_stress_M(const SpectralField& d, const SpectralField& m);
/// (v.grad) d, dealiased.
SpectralField director_convection_Btilde(const SpectralField& v, const SpectralField& d);
/// |grad d|^2 d, dealiased.
SpectralField ginzburg_term(const SpectralField& d);

/// G(d) = cross_sign * d x h pointwise.
SpectralField director_noise_G(const SpectralField& d, const MagneticField& h);
/// -1/2 (d x h) x h pointwise (independent of cross_sign).
SpectralField ito_correction_L(const SpectralField& d, const MagneticField& h);

/// Total nonlinear drift in the right-hand-side convention of the ledger above.
FieldPair full_drift_F(const FieldPair& y, const ModelParams& params);
inline FieldPair full_drift_F(const SystemState& y, const ModelParams& params) {
  return full_drift_F(FieldPair{y.v, y.d}, params);
}

using Vec3 = std::array<double, 3>;

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

/// Exact flow over "time" dEta of d' = sign * d x h: a rotation about h
/// by the angle -sign |h| dEta. Points with h = 0 are left unchanged.
Vec3 rotate_point(const Vec3& d, const Vec3& h, double dEta, int sign = 1);

/// Ito-form director noise step d + G(d) dEta + c/2 G^2(d) dt with
/// G(d) = sign * d x h; c is +1 except for the mis-signed test hook.
Vec3 ito_point(const Vec3& d, const Vec3& h, double dEta, double dt, int sign = 1, double correction_sign = 1.0);

}  // namespace nspd
