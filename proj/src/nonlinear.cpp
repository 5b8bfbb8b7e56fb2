#include "nspd/nonlinear.hpp"

#include <cmath>

#include "nspd/error.hpp"
#include "nspd/spectral.hpp"

namespace nspd {

namespace {

constexpr double kSolenoidalTol = 1e-10;

const Torus& torus_of(const SpectralField& f) {
  if (!f.torus()) throw ConfigError("field has no grid");
  return *f.torus();
}

void require_components(const SpectralField& f, int c, const char* what) {
  if (f.components() != c) throw ConfigError(std::string(what) + ": wrong number of components");
}

void require_solenoidal(const SpectralField& u, const char* what) {
  if (divergence_ratio(u) > kSolenoidalTol)
    throw PreconditionError(std::string(what) + ": advecting field is not divergence-free");
}

// out[c][p] = sum_j a[j][p] * grad[c * dim + j][p] on the padded grid.
PhysicalField advect(const PhysicalField& a, const PhysicalField& grad, int dim) {
  const int comps = grad.components / dim;
  PhysicalField out(comps, a.points);
  for (int c = 0; c < comps; ++c) {
    auto o = out.component(c);
    for (int j = 0; j < dim; ++j) {
      auto aj = a.component(j);
      auto g = grad.component(c * dim + j);
      for (std::size_t p = 0; p < a.points; ++p) o[p] += aj[p] * g[p];
    }
  }
  return out;
}

// Symmetric-in-structure tensor T_ij = sum_k gd[k*dim+i] gm[k*dim+j], stored i*dim+j.
PhysicalField stress_tensor(const PhysicalField& gd, const PhysicalField& gm, int dim) {
  PhysicalField out(dim * dim, gd.points);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      auto o = out.component(i * dim + j);
      for (int k = 0; k < 3; ++k) {
        auto a = gd.component(k * dim + i);
        auto b = gm.component(k * dim + j);
        for (std::size_t p = 0; p < gd.points; ++p) o[p] += a[p] * b[p];
      }
    }
  return out;
}

// Row-wise divergence sum_j d_j T_ij of a spectral dim x dim tensor.
SpectralField tensor_divergence(const SpectralField& t, int dim) {
  const Torus& tor = torus_of(t);
  SpectralField out = tor.zeros(dim);
  const Complex iu{0.0, 1.0};
  for (int i = 0; i < dim; ++i) {
    auto o = out.component(i);
    for (int j = 0; j < dim; ++j) {
      auto in = t.component(i * dim + j);
      for (std::size_t m = 0; m < tor.modes(); ++m) o[m] += iu * tor.derivative_wavenumber(m, j) * in[m];
    }
  }
  return out;
}

SpectralField back(const Torus& t, const PhysicalField& f) {
  SpectralField out = t.from_physical_padded(f);
  dealias_in_place(out);
  return out;
}

Vec3 sample(const PhysicalField& f, std::size_t p) { return {f.at(0, p), f.at(1, p), f.at(2, p)}; }

}  // namespace

bool MagneticField::is_zero() const {
  for (double x : samples.data)
    if (x != 0.0) return false;
  return true;
}

MagneticField make_magnetic_field(const std::shared_ptr<const Torus>& torus, const MagneticFieldSpec& spec) {
  SpectralField h = torus->zeros(3);
  for (int c = 0; c < 3; ++c)
    if (spec.constant[c] != 0.0) h.add_conjugate_pair(c, {0, 0, 0}, Complex{0.5 * spec.constant[c], 0.0});
  for (const FieldMode& m : spec.modes)
    h.add_conjugate_pair(m.component, m.k, 0.5 * Complex{m.a_cos, -m.a_sin});
  return make_magnetic_field(h, spec.cross_sign);
}

MagneticField make_magnetic_field(const SpectralField& h, int cross_sign) {
  require_components(h, 3, "magnetic field");
  if (cross_sign != 1 && cross_sign != -1) throw ConfigError("magnetic field: cross_sign must be +1 or -1");
  MagneticField out;
  out.h = h;
  out.samples = torus_of(h).to_physical(h);
  out.cross_sign = cross_sign;
  return out;
}

SpectralField convective_B(const SpectralField& u, const SpectralField& v) {
  const Torus& t = torus_of(u);
  const int dim = t.dim();
  require_components(u, dim, "convective_B");
  require_components(v, dim, "convective_B");
  require_solenoidal(u, "convective_B");
  const PhysicalField up = t.to_physical_padded(u);
  const PhysicalField gv = t.to_physical_padded(gradient(v));
  return leray_project(back(t, advect(up, gv, dim)));
}

SpectralField ericksen_stress_M(const SpectralField& d, const SpectralField& m) {
  const Torus& t = torus_of(d);
  const int dim = t.dim();
  require_components(d, 3, "ericksen_stress_M");
  require_components(m, 3, "ericksen_stress_M");
  const PhysicalField gd = t.to_physical_padded(gradient(d));
  const PhysicalField gm = &d == &m ? gd : t.to_physical_padded(gradient(m));
  SpectralField div = tensor_divergence(back(t, stress_tensor(gd, gm, dim)), dim);
  div *= -1.0;
  return leray_project(div);
}

SpectralField director_convection_Btilde(const SpectralField& v, const SpectralField& d) {
  const Torus& t = torus_of(v);
  const int dim = t.dim();
  require_components(v, dim, "director_convection_Btilde");
  require_components(d, 3, "director_convection_Btilde");
  require_solenoidal(v, "director_convection_Btilde");
  const PhysicalField vp = t.to_physical_padded(v);
  const PhysicalField gd = t.to_physical_padded(gradient(d));
  return back(t, advect(vp, gd, dim));
}

SpectralField ginzburg_term(const SpectralField& d) {
  const Torus& t = torus_of(d);
  require_components(d, 3, "ginzburg_term");
  PhysicalField dp = t.to_physical_padded(d);
  const PhysicalField gd = t.to_physical_padded(gradient(d));
  for (std::size_t p = 0; p < dp.points; ++p) {
    double g2 = 0.0;
    for (int c = 0; c < gd.components; ++c) g2 += gd.at(c, p) * gd.at(c, p);
    for (int k = 0; k < 3; ++k) dp.at(k, p) *= g2;
  }
  return back(t, dp);
}

SpectralField director_noise_G(const SpectralField& d, const MagneticField& h) {
  const Torus& t = torus_of(d);
  require_components(d, 3, "director_noise_G");
  PhysicalField dp = t.to_physical(d);
  for (std::size_t p = 0; p < dp.points; ++p) {
    const Vec3 g = cross(sample(dp, p), sample(h.samples, p));
    for (int k = 0; k < 3; ++k) dp.at(k, p) = h.cross_sign * g[k];
  }
  return t.to_spectral(dp);
}

SpectralField ito_correction_L(const SpectralField& d, const MagneticField& h) {
  const Torus& t = torus_of(d);
  require_components(d, 3, "ito_correction_L");
  PhysicalField dp = t.to_physical(d);
  for (std::size_t p = 0; p < dp.points; ++p) {
    const Vec3 hp = sample(h.samples, p);
    const Vec3 g2 = cross(cross(sample(dp, p), hp), hp);
    for (int k = 0; k < 3; ++k) dp.at(k, p) = -0.5 * g2[k];
  }
  return t.to_spectral(dp);
}

FieldPair full_drift_F(const FieldPair& y, const ModelParams& params) {
  const Torus& t = torus_of(y.v);
  const int dim = t.dim();
  require_components(y.v, dim, "full_drift_F");
  require_components(y.d, 3, "full_drift_F");
  FieldPair out = zero_pair(t);

  const bool need_v = params.convection || params.director_convection;
  const bool need_gd = params.stress || params.director_convection || params.ginzburg;
  if (params.director_convection) require_solenoidal(y.v, "full_drift_F");
  const PhysicalField vp = need_v ? t.to_physical_padded(y.v) : PhysicalField{};
  const PhysicalField gd = need_gd ? t.to_physical_padded(gradient(y.d)) : PhysicalField{};

  // Velocity: -Pi[(v.grad) v + lambda div(grad d (.) grad d)], one projection.
  if (params.convection || params.stress) {
    SpectralField acc = t.zeros(dim);
    if (params.convection) {
      require_solenoidal(y.v, "full_drift_F");
      acc += back(t, advect(vp, t.to_physical_padded(gradient(y.v)), dim));
    }
    if (params.stress && params.lambda != 0.0)
      acc.axpy(params.lambda, tensor_divergence(back(t, stress_tensor(gd, gd, dim)), dim));
    acc *= -1.0;
    out.v = leray_project(acc);
  }

  // Director: -(v.grad) d + gamma |grad d|^2 d, combined pointwise.
  if (params.director_convection || params.ginzburg) {
    PhysicalField acc(3, t.padded_points());
    if (params.director_convection) {
      acc = advect(vp, gd, dim);
      for (double& x : acc.data) x = -x;
    }
    if (params.ginzburg && params.gamma != 0.0) {
      const PhysicalField dp = t.to_physical_padded(y.d);
      for (std::size_t p = 0; p < acc.points; ++p) {
        double g2 = 0.0;
        for (int c = 0; c < gd.components; ++c) g2 += gd.at(c, p) * gd.at(c, p);
        for (int k = 0; k < 3; ++k) acc.at(k, p) += params.gamma * g2 * dp.at(k, p);
      }
    }
    out.d = back(t, acc);
  }
  return out;
}

Vec3 rotate_point(const Vec3& d, const Vec3& h, double dEta, int sign) {
  const double hn = std::sqrt(dot(h, h));
  if (hn == 0.0 || dEta == 0.0) return d;
  const Vec3 a{h[0] / hn, h[1] / hn, h[2] / hn};
  const double theta = -sign * hn * dEta;
  const double c = std::cos(theta), s = std::sin(theta);
  const Vec3 axd = cross(a, d);
  const double ad = dot(a, d);
  Vec3 out;
  for (int k = 0; k < 3; ++k) out[k] = d[k] * c + axd[k] * s + a[k] * ad * (1.0 - c);
  return out;
}

Vec3 ito_point(const Vec3& d, const Vec3& h, double dEta, double dt, int sign, double correction_sign) {
  const Vec3 g = cross(d, h);
  const Vec3 g2 = cross(g, h);
  const double c = 0.5 * correction_sign * dt;
  return {d[0] + sign * g[0] * dEta + c * g2[0], d[1] + sign * g[1] * dEta + c * g2[1],
          d[2] + sign * g[2] * dEta + c * g2[2]};
}

}  // namespace nspd
