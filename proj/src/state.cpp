#include "nspd/state.hpp"

#include <algorithm>
#include <cmath>

#include "nspd/error.hpp"
#include "nspd/spectral.hpp"

namespace nspd {

FieldPair& FieldPair::operator+=(const FieldPair& o) {
  v += o.v;
  d += o.d;
  return *this;
}

FieldPair& FieldPair::operator-=(const FieldPair& o) {
  v -= o.v;
  d -= o.d;
  return *this;
}

FieldPair& FieldPair::operator*=(double s) {
  v *= s;
  d *= s;
  return *this;
}

FieldPair& FieldPair::axpy(double s, const FieldPair& o) {
  v.axpy(s, o.v);
  d.axpy(s, o.d);
  return *this;
}

FieldPair operator-(FieldPair a, const FieldPair& b) { return a -= b; }

FieldPair zero_pair(const Torus& torus) { return {torus.zeros(torus.dim()), torus.zeros(3)}; }

double product_norm(const FieldPair& y, const SpaceTag& tag) {
  const int dim = y.v.torus()->dim();
  if (!(tag.alpha > dim / 2.0)) throw DomainError("product_norm: alpha must exceed dim/2");
  double a = tag.alpha;
  if (tag.level == SpaceLevel::H) a -= 1.0;
  if (tag.level == SpaceLevel::E) a += 1.0;
  // H^{alpha-1} may dip below zero only for alpha < 1, which alpha > d/2 excludes.
  const double nv = sobolev_norm(y.v, a);
  const double nd = sobolev_norm(y.d, a + 1.0);
  return std::sqrt(nv * nv + nd * nd);
}

SpectralField taylor_green(const std::shared_ptr<const Torus>& torus) {
  const int dim = torus->dim();
  SpectralField v = torus->zeros(dim);
  // sin x1 cos x2 = (sin(x1+x2) + sin(x1-x2)) / 2, written via plane waves:
  // sin(k.x) = Im exp(ik.x) -> amplitude -i/2 on exp(ik.x) (+ conjugate).
  const Complex s{0.0, -0.5};
  if (dim == 2) {
    // v1 = sin x1 cos x2
    v.add_conjugate_pair(0, {1, 1, 0}, 0.5 * s);
    v.add_conjugate_pair(0, {1, -1, 0}, 0.5 * s);
    // v2 = -cos x1 sin x2 = -(sin(x1+x2) - sin(x1-x2)) / 2
    v.add_conjugate_pair(1, {1, 1, 0}, -0.5 * s);
    v.add_conjugate_pair(1, {1, -1, 0}, 0.5 * s);
  } else {
    // v1 = sin x1 cos x2 cos x3, v2 = -cos x1 sin x2 cos x3: evaluate on the
    // grid; the product is a trigonometric polynomial resolved exactly.
    PhysicalField p = torus->physical_zeros(3);
    for (std::size_t i = 0; i < torus->points(); ++i) {
      const double x1 = torus->coordinate(i, 0), x2 = torus->coordinate(i, 1), x3 = torus->coordinate(i, 2);
      p.at(0, i) = std::sin(x1) * std::cos(x2) * std::cos(x3);
      p.at(1, i) = -std::cos(x1) * std::sin(x2) * std::cos(x3);
    }
    v = torus->to_spectral(p);
  }
  return v;
}

PhysicalField director_perturbation(const Torus& torus) {
  PhysicalField p = torus.physical_zeros(3);
  const bool three = torus.dim() == 3;
  for (std::size_t i = 0; i < torus.points(); ++i) {
    const double x1 = torus.coordinate(i, 0), x2 = torus.coordinate(i, 1);
    const double x3 = three ? torus.coordinate(i, 2) : 0.0;
    p.at(0, i) = std::cos(x2) + (three ? std::sin(x3) : 0.0);
    p.at(1, i) = std::sin(x1);
    p.at(2, i) = std::cos(x1 + x2 + x3);
  }
  return p;
}

SystemState make_initial_state(const std::shared_ptr<const Torus>& torus, const InitialData& init) {
  SystemState y;
  y.time = 0.0;
  y.v = taylor_green(torus);
  y.v *= init.taylor_green_amplitude;
  remove_mean(y.v);

  PhysicalField d = director_perturbation(*torus);
  const double eps = init.director_epsilon;
  for (std::size_t i = 0; i < torus->points(); ++i) {
    const double a = eps * d.at(0, i), b = eps * d.at(1, i), c = 1.0 + eps * d.at(2, i);
    const double r = std::sqrt(a * a + b * b + c * c);
    if (r < 1e-8)
      throw ConfigError("initial director perturbation vanishes at a grid point (|e3 + eps p| < 1e-8)");
    d.at(0, i) = a / r;
    d.at(1, i) = b / r;
    d.at(2, i) = c / r;
  }
  y.d = torus->to_spectral(d);
  return y;
}

bool is_solenoidal(const SpectralField& v, double tol) {
  bool zero_mean = true;
  for (int c = 0; c < v.components(); ++c)
    if (v.at(c, 0) != Complex{0.0, 0.0}) zero_mean = false;
  return zero_mean && divergence_ratio(v) <= tol;
}

PathNorm path_norm_accumulate(const std::vector<double>& t, const std::vector<double>& v_norm,
                              const std::vector<double>& e_norm, double t_end) {
  if (t.empty()) throw DomainError("path_norm_accumulate: empty record");
  if (v_norm.size() != t.size() || e_norm.size() != t.size())
    throw DomainError("path_norm_accumulate: series lengths differ");
  PathNorm out;
  for (double x : v_norm) out.sup_term = std::max(out.sup_term, x * x);
  if (t.size() == 1) {
    out.integral_term = (t_end - t.front()) * e_norm.front() * e_norm.front();
    return out;
  }
  for (std::size_t i = 1; i < t.size(); ++i)
    out.integral_term += 0.5 * (t[i] - t[i - 1]) * (e_norm[i] * e_norm[i] + e_norm[i - 1] * e_norm[i - 1]);
  return out;
}

}  // namespace nspd
