#include "nspd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "nspd/error.hpp"
#include "nspd/noise.hpp"
#include "nspd/nonlinear.hpp"
#include "nspd/spectral.hpp"

namespace nspd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const Torus& torus_of(const SpectralField& f) {
  if (!f.torus()) throw ConfigError("field has no grid");
  return *f.torus();
}

// |d|^2 - 1 at every native grid point.
std::vector<double> sphere_defect(const SpectralField& d) {
  if (d.components() != 3) throw ConfigError("director must have 3 components");
  const PhysicalField p = torus_of(d).to_physical(d);
  std::vector<double> a(p.points);
  for (std::size_t i = 0; i < p.points; ++i)
    a[i] = p.at(0, i) * p.at(0, i) + p.at(1, i) * p.at(1, i) + p.at(2, i) * p.at(2, i) - 1.0;
  return a;
}

double ratio_or_nan(double lhs, double rhs) { return rhs > 0.0 ? lhs / rhs : kNaN; }

void keep_max(double& slot, double r, std::size_t& skipped) {
  if (std::isnan(r)) {
    ++skipped;
    return;
  }
  slot = std::max(slot, r);
}

}  // namespace

ConstraintReport constraint_report(const SpectralField& d, double t) {
  const std::vector<double> a = sphere_defect(d);
  const Torus& tor = torus_of(d);
  const double w = tor.volume() / static_cast<double>(tor.points());
  ConstraintReport r;
  r.t = t;
  for (double x : a) {
    r.max_pointwise_dev = std::max(r.max_pointwise_dev, std::abs(x));
    if (x < 0.0) r.y_minus += x * x;
    if (x > 0.0) r.z_plus += x * x;
  }
  r.y_minus *= w;
  r.z_plus *= w;
  return r;
}

double mollifier_phi(double s) {
  if (s <= -2.0) return -1.0;
  if (s >= -1.0) return 0.0;
  const double x = s + 2.0;  // 0 at s = -2, 1 at s = -1
  const double step = x * x * x * (x * (6.0 * x - 15.0) + 10.0);
  return step - 1.0;
}

double psi_ell(const SpectralField& d, double ell) {
  if (!(ell >= 1.0)) throw DomainError("psi_ell: ell must be >= 1");
  const std::vector<double> a = sphere_defect(d);
  const Torus& tor = torus_of(d);
  double s = 0.0;
  for (double x : a) s += x * x * std::abs(mollifier_phi(ell * x));
  return s * tor.volume() / static_cast<double>(tor.points());
}

IdentityResiduals vector_identity_checks(const SpectralField& d) {
  const Torus& t = torus_of(d);
  if (d.components() != 3) throw ConfigError("vector_identity_checks: director must have 3 components");
  const int dim = t.dim();
  const PhysicalField dp = t.to_physical_padded(d);
  const SpectralField gd = gradient(d);
  const PhysicalField gp = t.to_physical_padded(gd);
  const PhysicalField lp = t.to_physical_padded(laplacian(d));

  PhysicalField sq(1, t.padded_points());       // |d|^2
  PhysicalField rhs_grad(dim, t.padded_points());  // 2 (grad d)^T d
  PhysicalField rhs_lap(1, t.padded_points());  // 2 Lap d . d + 2 |grad d|^2
  for (std::size_t p = 0; p < sq.points; ++p) {
    for (int k = 0; k < 3; ++k) {
      sq.at(0, p) += dp.at(k, p) * dp.at(k, p);
      rhs_lap.at(0, p) += 2.0 * lp.at(k, p) * dp.at(k, p);
      for (int j = 0; j < dim; ++j) {
        const double g = gp.at(k * dim + j, p);
        rhs_grad.at(j, p) += 2.0 * g * dp.at(k, p);
        rhs_lap.at(0, p) += 2.0 * g * g;
      }
    }
  }
  auto back = [&](const PhysicalField& f) {
    SpectralField s = t.from_physical_padded(f);
    dealias_in_place(s);
    return s;
  };
  const SpectralField s = back(sq);
  IdentityResiduals r;
  r.gradient = linf_norm(gradient(s) - back(rhs_grad));
  r.laplacian = linf_norm(laplacian(s) - back(rhs_lap));
  return r;
}

double estimate_delta(double alpha, int dim) {
  const double delta = (alpha - dim / 2.0) / 2.0;
  return std::clamp(delta, 1e-6, 1.0 - 1e-6);
}

double ratio_convective(const SpectralField& u, const SpectralField& v, double alpha) {
  const double delta = estimate_delta(alpha, torus_of(u).dim());
  const double lhs = sobolev_norm(convective_B(u, v), alpha - 1.0);
  const double rhs = linf_norm(u) * sobolev_norm(v, alpha) +
                     sobolev_norm(u, alpha - 1.0) * std::pow(sobolev_norm(v, alpha + 1.0), delta) *
                         std::pow(sobolev_norm(v, alpha), 1.0 - delta);
  return ratio_or_nan(lhs, rhs);
}

double ratio_director(const SpectralField& v, const SpectralField& d, double alpha) {
  const double lhs = sobolev_norm(director_convection_Btilde(v, d), alpha);
  return ratio_or_nan(lhs, sobolev_norm(v, alpha) * sobolev_norm(d, alpha + 1.0));
}

double ratio_stress(const SpectralField& d, const SpectralField& m, double alpha) {
  const double lhs = sobolev_norm(ericksen_stress_M(d, m), alpha - 1.0);
  return ratio_or_nan(lhs, sobolev_norm(d, alpha + 1.0) * sobolev_norm(m, alpha + 1.0));
}

double ratio_ginzburg(const SpectralField& d, const SpectralField& m, double alpha) {
  const double lhs = sobolev_norm(ginzburg_term(d) - ginzburg_term(m), alpha);
  const SpectralField diff = d - m;
  const double dm1 = sobolev_norm(diff, alpha + 1.0);
  const double rhs =
      dm1 * (sobolev_norm(d, alpha + 1.0) + sobolev_norm(m, alpha + 1.0)) * sobolev_norm(d, alpha) +
      std::pow(sobolev_norm(m, alpha + 1.0), 2) * sobolev_norm(diff, alpha);
  return ratio_or_nan(lhs, rhs);
}

double ratio_product(const SpectralField& f, const SpectralField& g, double s) {
  const double lhs = sobolev_norm(multiply(f, g), s);
  const double rhs = linf_norm(f) * sobolev_norm(g, s) + sobolev_norm(f, s) * linf_norm(g);
  return ratio_or_nan(lhs, rhs);
}

SpectralField random_field(const std::shared_ptr<const Torus>& torus, int components, int band, double decay,
                           std::uint64_t key, bool solenoidal) {
  const int dim = torus->dim();
  SpectralField f = torus->zeros(components);
  NormalStream z(key);
  const int b3 = dim == 3 ? band : 0;
  for (int c = 0; c < components; ++c)
    for (int a = -band; a <= band; ++a)
      for (int b = -band; b <= band; ++b)
        for (int e = -b3; e <= b3; ++e) {
          const Wavevector k{a, b, e};
          // one representative per conjugate pair: first nonzero entry positive
          const int first = a != 0 ? a : (b != 0 ? b : e);
          if (first < 0) continue;
          const double k2 = a * a + b * b + e * e;
          const double scale = std::pow(1.0 + k2, -decay / 2.0);
          const double re = z(), im = z();
          if (first == 0)
            f.add_conjugate_pair(c, k, Complex{0.5 * scale * re, 0.0});
          else
            f.add_conjugate_pair(c, k, 0.5 * scale * Complex{re, im});
        }
  if (solenoidal) return leray_project(f);
  return f;
}

bool RatioSuite::all_finite() const {
  for (double x : {est_convective, est_director, est_stress, est_ginzburg, est_product, est_semigroup, est_drift})
    if (!std::isfinite(x)) return false;
  return true;
}

double RatioSuite::max_ratio() const {
  return std::max({est_convective, est_director, est_stress, est_ginzburg, est_product, est_semigroup, est_drift});
}

RatioSuite lemma_ratio_suite(std::size_t n_samples, double alpha, std::uint64_t seed, const Grid& grid) {
  if (n_samples < 1) throw DomainError("lemma_ratio_suite: need at least one sample");
  const auto torus = Torus::create(grid);
  const int dim = torus->dim();
  if (!(alpha > dim / 2.0)) throw DomainError("lemma_ratio_suite: alpha must exceed dim/2");
  // Cubic products of band-limited samples stay inside the retained band.
  int kc = 0;
  for (std::size_t m = 0; m < torus->modes(); ++m)
    if (torus->retained(m)) kc = std::max(kc, std::abs(torus->wavevector(m)[0]));
  const int band = std::max(1, kc / 3);

  RatioSuite s;
  std::size_t& sk = s.skipped;
  const ModelParams params;

  // Fixed sample: Taylor-Green velocity with the planar director.
  {
    const SpectralField tg = taylor_green(torus);
    PhysicalField dp = torus->physical_zeros(3);
    for (std::size_t i = 0; i < torus->points(); ++i) {
      dp.at(0, i) = std::cos(torus->coordinate(i, 0));
      dp.at(1, i) = std::sin(torus->coordinate(i, 0));
    }
    const SpectralField planar = torus->to_spectral(dp);
    keep_max(s.est_convective, ratio_convective(tg, tg, alpha), sk);
    keep_max(s.est_director, ratio_director(tg, planar, alpha), sk);
    keep_max(s.est_stress, ratio_stress(planar, planar, alpha), sk);
  }

  const double delta = estimate_delta(alpha, dim);
  const std::vector<double> times{1e-3, 1e-2, 1e-1, 1.0, 10.0};
  for (std::size_t i = 0; i < n_samples; ++i) {
    auto key = [&](std::uint64_t slot) { return stream_key(seed, i, slot); };
    NormalStream amp(key(99));
    const double decay = 2.0;
    const SpectralField u = random_field(torus, dim, band, decay, key(1), true);
    const SpectralField v = random_field(torus, dim, band, decay, key(2), true);
    const SpectralField d = random_field(torus, 3, band, decay, key(3));
    const SpectralField m = random_field(torus, 3, band, decay, key(4));
    const SpectralField f = random_field(torus, 1, band, decay, key(5));
    const SpectralField g = random_field(torus, 1, band, decay, key(6));

    keep_max(s.est_convective, ratio_convective(u, v, alpha), sk);
    keep_max(s.est_director, ratio_director(v, d, alpha), sk);
    keep_max(s.est_stress, ratio_stress(d, m, alpha), sk);
    keep_max(s.est_ginzburg, ratio_ginzburg(d, m, alpha), sk);
    keep_max(s.est_product, ratio_product(f, g, alpha), sk);

    const double s0 = alpha - 1.0, s1 = alpha + 1.0;
    const double base = sobolev_norm(u, s0);
    for (double t : times) {
      const double lhs = sobolev_norm(semigroup_apply(u, t, Semigroup::stokes), s1);
      keep_max(s.est_semigroup, ratio_or_nan(lhs, base * (1.0 + std::pow(t, -(s1 - s0) / 2.0))), sk);
    }

    // Full drift between two states of moderate, random size.
    const double a1 = std::exp(0.5 * amp()), a2 = std::exp(0.5 * amp());
    const FieldPair y1{a1 * u, a1 * d};
    const FieldPair y2{a2 * v, a2 * m};
    const FieldPair diff = y1 - y2;
    const double lhs = product_norm(full_drift_F(y1, params) - full_drift_F(y2, params), {SpaceLevel::H, alpha});
    const double dv = product_norm(diff, {SpaceLevel::V, alpha});
    const double de = product_norm(diff, {SpaceLevel::E, alpha});
    const double n1 = product_norm(y1, {SpaceLevel::V, alpha});
    const double n2 = product_norm(y2, {SpaceLevel::V, alpha});
    const double e2 = product_norm(y2, {SpaceLevel::E, alpha});
    const double rhs = dv * (std::pow(n1, 1.0 - delta) * std::pow(e2, delta) + n1 + n2 + n1 * n1 + n2 * n2) +
                       std::pow(dv, 1.0 - delta) * std::pow(de, delta) * n2;
    keep_max(s.est_drift, ratio_or_nan(lhs, rhs), sk);
    ++s.samples;
  }
  return s;
}

const char* to_string(LifespanStatus s) {
  switch (s) {
    case LifespanStatus::completed: return "completed";
    case LifespanStatus::stopped: return "stopped";
    case LifespanStatus::failed: return "failed";
  }
  return "unknown";
}

LifespanSample blowup_monitor(const std::vector<double>& t, const std::vector<double>& norms,
                              const std::vector<double>& thresholds, double t_max) {
  if (t.size() != norms.size()) throw DomainError("blowup_monitor: series lengths differ");
  LifespanSample s;
  s.tau.assign(thresholds.size(), kNaN);
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t m = 0; m < thresholds.size(); ++m)
      if (std::isnan(s.tau[m]) && norms[i] >= thresholds[m]) s.tau[m] = t[i];
  if (!thresholds.empty() && !std::isnan(s.tau.back()) && s.tau.back() <= t_max) s.status = LifespanStatus::stopped;
  return s;
}

LifespanSample blowup_monitor(const TrajectoryRecord& rec) {
  LifespanSample s;
  s.trajectory = rec.trajectory;
  s.tau = rec.tau;
  switch (rec.status) {
    case RunStatus::completed: s.status = LifespanStatus::completed; break;
    case RunStatus::stopped_at_threshold: s.status = LifespanStatus::stopped; break;
    case RunStatus::numerical_failure: s.status = LifespanStatus::failed; break;
  }
  return s;
}

std::pair<double, double> wilson_interval(std::size_t k, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

SurvivalCurve lifespan_statistics(const std::vector<LifespanSample>& samples, const std::vector<double>& t_grid) {
  if (samples.empty()) throw DomainError("lifespan_statistics: no samples");
  SurvivalCurve c;
  c.amplitude = kNaN;
  c.n = samples.size();
  c.t = t_grid;
  for (double t : t_grid) {
    std::size_t alive = 0;
    for (const LifespanSample& s : samples) {
      const double top = s.tau.empty() || std::isnan(s.tau.back()) ? std::numeric_limits<double>::infinity()
                                                                    : s.tau.back();
      if (top >= t) ++alive;
    }
    c.survival.push_back(static_cast<double>(alive) / static_cast<double>(c.n));
    const auto [lo, hi] = wilson_interval(alive, c.n);
    c.lower.push_back(lo);
    c.upper.push_back(hi);
  }
  return c;
}

std::vector<SurvivalCurve> lifespan_by_amplitude(const std::vector<LifespanSample>& samples,
                                                 const std::vector<double>& t_grid) {
  std::map<double, std::vector<LifespanSample>> groups;
  for (const LifespanSample& s : samples) groups[s.amplitude].push_back(s);
  std::vector<SurvivalCurve> out;
  for (const auto& [amp, group] : groups) {
    SurvivalCurve c = lifespan_statistics(group, t_grid);
    c.amplitude = amp;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace nspd
