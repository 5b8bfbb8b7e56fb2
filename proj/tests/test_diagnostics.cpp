#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "nspd/diagnostics.hpp"
#include "nspd/error.hpp"
#include "nspd/spectral.hpp"
#include "nspd/state.hpp"
#include "oracles.hpp"

using namespace nspd;
constexpr double two_pi_sq = 4.0 * std::numbers::pi * std::numbers::pi;
const double nan_ = std::numeric_limits<double>::quiet_NaN();

namespace {

std::shared_ptr<const Torus> box(int n = 32) { return Torus::create(Grid{2, n, 2.0 / 3.0}); }

SpectralField constant3(const std::shared_ptr<const Torus>& t, std::array<double, 3> a) {
  return oracle::from_function(t, 3, [a](int c, const std::array<double, 3>&) { return a[c]; });
}

/// ||(|d|^2 - 1)_-||^2 by rectangle quadrature, coded here.
double negative_part_energy(const SpectralField& d) {
  const Torus& t = *d.torus();
  const PhysicalField p = t.to_physical(d);
  double s = 0.0;
  for (std::size_t i = 0; i < p.points; ++i) {
    const double a = p.at(0, i) * p.at(0, i) + p.at(1, i) * p.at(1, i) + p.at(2, i) * p.at(2, i) - 1.0;
    if (a < 0.0) s += a * a;
  }
  return s * t.volume() / static_cast<double>(t.points());
}

SpectralField mixed_sign(const std::shared_ptr<const Torus>& t, std::uint64_t key) {
  SpectralField d = random_field(t, 3, 4, 1.0, key);
  d *= 1.3 / linf_norm(d);
  return d;
}

}  // namespace

TEST_CASE("constraint report on constant fields") {
  const auto t = box();
  const ConstraintReport u = constraint_report(constant3(t, {0.6, 0.0, 0.8}), 0.25);
  CHECK(u.t == 0.25);
  CHECK(u.max_pointwise_dev < 1e-15);
  CHECK(u.y_minus < 1e-28);
  CHECK(u.z_plus < 1e-28);

  const ConstraintReport big = constraint_report(constant3(t, {0, 0, 2}));
  CHECK(big.max_pointwise_dev == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(big.z_plus == doctest::Approx(9.0 * two_pi_sq).epsilon(1e-14));
  CHECK(big.y_minus == 0.0);

  const ConstraintReport half = constraint_report(constant3(t, {0, 0, 0.5}));
  CHECK(half.y_minus == doctest::Approx(0.5625 * two_pi_sq).epsilon(1e-14));
  CHECK(half.z_plus == 0.0);
}

TEST_CASE("mollifier") {
  CHECK(mollifier_phi(-5.0) == -1.0);
  CHECK(mollifier_phi(-2.0) == -1.0);
  CHECK(mollifier_phi(-1.0) == 0.0);
  CHECK(mollifier_phi(3.0) == 0.0);
  double prev = -1.0;
  for (double s = -2.0; s <= -1.0; s += 1e-3) {
    CHECK(mollifier_phi(s) >= prev);
    prev = mollifier_phi(s);
  }
  // flat joins: one-sided difference quotients vanish at both ends
  const double h = 1e-5;
  CHECK(std::abs(mollifier_phi(-2.0 + h) - mollifier_phi(-2.0)) / h < 1e-6);
  CHECK(std::abs(mollifier_phi(-1.0) - mollifier_phi(-1.0 - h)) / h < 1e-6);
}

TEST_CASE("Psi_ell") {
  const auto t = box();
  CHECK_THROWS_AS(psi_ell(constant3(t, {0, 0, 1}), 0.5), DomainError);
  for (double ell : {1.0, 10.0, 1e4}) CHECK(psi_ell(constant3(t, {0, 1, 0}), ell) < 1e-28);

  for (double ell : {10.0, 100.0, 1e3}) {
    const double r = std::sqrt(1.0 - 3.0 / ell);
    const double want = (3.0 / ell) * (3.0 / ell) * two_pi_sq;
    CHECK(psi_ell(constant3(t, {0, 0, r}), ell) == doctest::Approx(want).epsilon(1e-10));
  }

  const SpectralField d = mixed_sign(t, 17);
  const double y = negative_part_energy(d);
  REQUIRE(y > 0.0);
  CHECK(constraint_report(d).y_minus == doctest::Approx(y).epsilon(1e-13));
  double prev_gap = std::numeric_limits<double>::infinity(), prev_psi = 0.0;
  for (double ell : {1e2, 1e3, 1e4, 1e5, 1e6}) {
    const double p = psi_ell(d, ell);
    const double gap = std::abs(p - y);
    CHECK(gap <= prev_gap);
    CHECK(p >= prev_psi);
    prev_gap = gap;
    prev_psi = p;
    if (ell >= 1e4) CHECK(gap <= 1e-6);
  }
}

TEST_CASE("vector identities") {
  const auto t = box();
  const IdentityResiduals c = vector_identity_checks(constant3(t, {1, -2, 0.5}));
  CHECK(c.gradient < 1e-13);
  CHECK(c.laplacian < 1e-13);
  const SpectralField planar = oracle::from_function(t, 3, [](int k, const std::array<double, 3>& x) {
    return k == 0 ? std::cos(x[0]) : k == 1 ? std::sin(x[0]) : 0.0;
  });
  const IdentityResiduals p = vector_identity_checks(planar);
  CHECK(p.gradient <= 1e-12);
  CHECK(p.laplacian <= 1e-12);
  const SpectralField d = random_field(t, 3, oracle::cutoff(*t) / 2, 1.0, 4);
  const IdentityResiduals r = vector_identity_checks(d);
  const double h2 = sobolev_norm(d, 2.0);
  CHECK(r.gradient <= 1e-8 * h2 * h2);
  CHECK(r.laplacian <= 1e-8 * h2 * h2);
}

TEST_CASE("estimate ratio suite") {
  const Grid g{2, 32, 2.0 / 3.0};
  const RatioSuite a = lemma_ratio_suite(100, 2.0, 1, g);
  const RatioSuite b = lemma_ratio_suite(100, 2.0, 2, g);
  CHECK(a.all_finite());
  CHECK(b.all_finite());
  CHECK(a.samples >= 100);
  const double hi = std::max(a.max_ratio(), b.max_ratio()), lo = std::min(a.max_ratio(), b.max_ratio());
  CHECK(hi <= 3.0 * lo);
  CHECK(estimate_delta(2.0, 2) == doctest::Approx(0.5));
  CHECK(estimate_delta(2.0, 3) == doctest::Approx(0.25));

  const auto t = box();
  const SpectralField z2 = t->zeros(2), z3 = t->zeros(3);
  CHECK(std::isnan(ratio_convective(z2, z2, 2.0)));
  CHECK(std::isnan(ratio_director(z2, z3, 2.0)));
  CHECK(std::isnan(ratio_stress(z3, z3, 2.0)));

  // the fixed Taylor-Green / planar sample is below the suite maximum
  const SpectralField planar = oracle::from_function(t, 3, [](int k, const std::array<double, 3>& x) {
    return k == 0 ? std::cos(x[0]) : k == 1 ? std::sin(x[0]) : 0.0;
  });
  const double r = ratio_director(taylor_green(t), planar, 2.0);
  CHECK(std::isfinite(r));
  CHECK(r <= lemma_ratio_suite(10, 2.0, 1, Grid{2, 32, 2.0 / 3.0}).est_director);

  // homogeneity
  const SpectralField d = random_field(t, 3, 4, 2.0, 5), m = random_field(t, 3, 4, 2.0, 6);
  CHECK(std::abs(ratio_stress(2.0 * d, 2.0 * m, 2.0) / ratio_stress(d, m, 2.0) - 1.0) < 1e-12);
  CHECK(std::abs(ratio_ginzburg(2.0 * d, 2.0 * m, 2.0) / ratio_ginzburg(d, m, 2.0) - 1.0) < 1e-12);
}

TEST_CASE("blow-up monitor") {
  const LifespanSample flat = blowup_monitor({0.0, 0.5, 1.0}, {1.0, 1.0, 1.0}, {2.0, 4.0}, 1.0);
  CHECK(flat.status == LifespanStatus::completed);
  for (double t : flat.tau) CHECK(std::isnan(t));

  std::vector<double> t, n;
  for (int i = 0; i < 1024; ++i) {
    t.push_back(i / 1024.0);
    n.push_back(1.0 / (1.0 - i / 1024.0));
  }
  const LifespanSample s = blowup_monitor(t, n, {2.0, 4.0, 8.0}, 1.0);
  CHECK(s.status == LifespanStatus::stopped);
  CHECK(s.tau == std::vector<double>{0.5, 0.75, 0.875});

  TrajectoryRecord rec;
  rec.rows.resize(3);
  rec.tau = {0.1, nan_, nan_};
  rec.status = RunStatus::completed;
  CHECK(blowup_monitor(rec).status == LifespanStatus::completed);
  rec.status = RunStatus::numerical_failure;
  rec.tau = {0.1, 0.2, 0.2};
  CHECK(blowup_monitor(rec).status == LifespanStatus::failed);
}

TEST_CASE("lifespan statistics") {
  CHECK_THROWS_AS(lifespan_statistics({}, {0.0, 1.0}), DomainError);
  const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};

  std::vector<LifespanSample> done(4);
  for (auto& s : done) s.tau = {nan_};
  const SurvivalCurve all = lifespan_statistics(done, grid);
  for (double p : all.survival) CHECK(p == 1.0);

  // known top crossings 0.2, 0.4, 0.6, never, never
  std::vector<LifespanSample> mix(5);
  const double tops[] = {0.2, 0.4, 0.6, nan_, nan_};
  for (int i = 0; i < 5; ++i) {
    mix[i].tau = {tops[i]};
    mix[i].amplitude = i < 3 ? 2.0 : 1.0;
    mix[i].status = std::isnan(tops[i]) ? LifespanStatus::completed : LifespanStatus::stopped;
  }
  const SurvivalCurve c = lifespan_statistics(mix, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    int alive = 0;
    for (double x : tops) alive += (std::isnan(x) || x >= grid[i]) ? 1 : 0;
    CHECK(c.survival[i] == doctest::Approx(alive / 5.0));
    CHECK(c.lower[i] <= c.survival[i]);
    CHECK(c.upper[i] >= c.survival[i]);
    if (i > 0) CHECK(c.survival[i] <= c.survival[i - 1]);
  }
  const auto by = lifespan_by_amplitude(mix, grid);
  REQUIRE(by.size() == 2);
  CHECK(by[0].amplitude == 1.0);
  CHECK(by[0].n == 2);
  CHECK(by[1].survival.back() == 0.0);

  const auto [lo, hi] = wilson_interval(5, 10);
  CHECK(lo == doctest::Approx(0.2366).epsilon(1e-3));
  CHECK(hi == doctest::Approx(0.7634).epsilon(1e-3));
}
