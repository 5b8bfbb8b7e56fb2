#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nspd/diagnostics.hpp"
#include "nspd/error.hpp"
#include "nspd/spectral.hpp"
#include "nspd/state.hpp"
#include "oracles.hpp"

using namespace nspd;
constexpr double pi = std::numbers::pi;

namespace {

std::shared_ptr<const Torus> box(int dim = 2, int n = 32) { return Torus::create(Grid{dim, n, 2.0 / 3.0}); }

SpectralField sin_x1(const std::shared_ptr<const Torus>& t) {
  return oracle::from_function(t, 1, [](int, const std::array<double, 3>& x) { return std::sin(x[0]); });
}

double max_abs(const PhysicalField& f) {
  double m = 0.0;
  for (double x : f.data) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("constant field has a single k = 0 coefficient") {
  const auto t = box();
  PhysicalField p = t->physical_zeros(1);
  for (double& x : p.data) x = 2.5;
  const SpectralField f = t->to_spectral(p);
  for (std::size_t m = 0; m < t->modes(); ++m) {
    const auto& k = t->wavevector(m);
    if (k[0] == 0 && k[1] == 0)
      CHECK(std::abs(f.at(0, m) - Complex(2.5, 0.0)) < 1e-14);
    else
      CHECK(std::abs(f.at(0, m)) < 1e-14);
  }
}

TEST_CASE("sin(x1) has exactly the modes k = (+-1, 0)") {
  for (int dim : {2, 3}) {
    const auto t = box(dim, 16);
    const SpectralField f = sin_x1(t);
    int nonzero = 0;
    for (std::size_t m = 0; m < t->modes(); ++m) {
      if (std::abs(f.at(0, m)) < 1e-13) continue;
      ++nonzero;
      const auto& k = t->wavevector(m);
      CHECK(std::abs(k[0]) == 1);
      CHECK(k[1] == 0);
      CHECK(k[2] == 0);
      // sin x = (e^{ix} - e^{-ix}) / 2i
      CHECK(std::abs(f.at(0, m) - Complex(0.0, -0.5 * k[0])) < 1e-14);
    }
    CHECK(nonzero == 2);
  }
}

TEST_CASE("transform round trip and direct-sum evaluation") {
  for (int dim : {2, 3}) {
    const auto t = box(dim, dim == 2 ? 32 : 16);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> z;
    PhysicalField p = t->physical_zeros(2);
    for (double& x : p.data) x = z(rng);
    const PhysicalField q = t->to_physical(t->to_spectral(p));
    double err = 0.0;
    for (std::size_t i = 0; i < p.data.size(); ++i) err = std::max(err, std::abs(p.data[i] - q.data[i]));
    CHECK(err < 1e-12);

    const SpectralField f = random_field(t, 1, 3, 1.0, 11);
    const PhysicalField s = t->to_physical(f);
    for (std::size_t pt : {std::size_t{0}, std::size_t{17}, t->points() / 2 + 3}) {
      std::array<double, 3> x{0, 0, 0};
      for (int j = 0; j < dim; ++j) x[j] = t->coordinate(pt, j);
      CHECK(std::abs(oracle::eval_direct(f, 0, x) - s.at(0, pt)) < 1e-12);
    }
  }
}

TEST_CASE("gradient and laplacian against analytic derivatives") {
  const auto t = box();
  const PhysicalField g = t->to_physical(gradient(sin_x1(t)));
  for (std::size_t p = 0; p < t->points(); ++p) {
    CHECK(std::abs(g.at(0, p) - std::cos(t->coordinate(p, 0))) < 1e-13);
    CHECK(std::abs(g.at(1, p)) < 1e-13);
  }
  PhysicalField c = t->physical_zeros(1);
  for (double& x : c.data) x = 3.0;
  CHECK(max_abs(t->to_physical(gradient(t->to_spectral(c)))) < 1e-13);
  CHECK(max_abs(t->to_physical(laplacian(t->to_spectral(c)))) < 1e-13);

  SpectralField s = sin_x1(t);
  SpectralField ls = laplacian(s);
  ls += s;
  CHECK(max_abs(t->to_physical(ls)) < 1e-13);

  const SpectralField sc = oracle::from_function(
      t, 1, [](int, const std::array<double, 3>& x) { return std::sin(x[0]) * std::cos(x[1]); });
  SpectralField lsc = laplacian(sc);
  lsc.axpy(2.0, sc);
  CHECK(max_abs(t->to_physical(lsc)) < 1e-13);

  // single mode e^{ik.x}: gradient is i k times the mode
  SpectralField e = t->zeros(1);
  const Wavevector k{2, -3, 0};
  e.add_conjugate_pair(0, k, Complex(0.3, 0.1));
  const SpectralField ge = gradient(e);
  std::size_t idx;
  bool conj;
  REQUIRE(t->locate(k, idx, conj));
  const Complex a = conj ? std::conj(e.at(0, idx)) : e.at(0, idx);
  for (int j = 0; j < 2; ++j) {
    const Complex gj = conj ? std::conj(ge.at(j, idx)) : ge.at(j, idx);
    CHECK(std::abs(gj - Complex(0.0, k[j]) * a) < 1e-15);
  }
}

TEST_CASE("Leray projection") {
  const auto t = box();
  SUBCASE("annihilates gradients") {
    const SpectralField phi = random_field(t, 1, 5, 1.0, 3);
    CHECK(l2_norm(leray_project(gradient(phi))) < 1e-13 * l2_norm(gradient(phi)));
  }
  SUBCASE("fixes Taylor-Green") {
    const SpectralField tg = taylor_green(t);
    CHECK(oracle::rel_diff(leray_project(tg), tg) < 1e-15);
  }
  SUBCASE("single mode matches the multiplier formula and is solenoidal in physical space") {
    SpectralField u = t->zeros(2);
    u.add_conjugate_pair(0, {3, 1, 0}, Complex(1.0, 0.5));
    u.add_conjugate_pair(1, {3, 1, 0}, Complex(-0.2, 2.0));
    const SpectralField p = leray_project(u);
    CHECK(oracle::rel_diff(p, oracle::project(u)) < 1e-15);
    CHECK(max_abs(t->to_physical(divergence(p))) <= 1e-12 * l2_norm(u));
  }
  SUBCASE("idempotent, solenoidal, mean-free") {
    const SpectralField u = random_field(t, 2, 10, 0.5, 5);
    const SpectralField p = leray_project(u);
    CHECK(l2_norm(leray_project(p) - p) <= 1e-14 * l2_norm(u));
    CHECK(divergence_ratio(p) <= 1e-12);
    CHECK(std::abs(p.at(0, 0)) == 0.0);
  }
}

TEST_CASE("Sobolev norms of sin(x1)") {
  const auto t = box();
  CHECK(sobolev_norm(t->zeros(1), 1.5) == 0.0);
  const SpectralField s = sin_x1(t);
  CHECK(sobolev_norm(s, 0.0) == doctest::Approx(pi * std::sqrt(2.0)).epsilon(1e-14));
  for (double r : {0.5, 1.0, 2.0, 3.7})
    CHECK(sobolev_norm(s, r) == doctest::Approx(std::pow(2.0, r / 2) * pi * std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("Parseval against physical quadrature") {
  const auto t = box(3, 16);
  const SpectralField f = random_field(t, 3, 5, 0.0, 9);
  const PhysicalField p = t->to_physical(f);
  double q = 0.0;
  for (double x : p.data) q += x * x;
  q *= t->volume() / static_cast<double>(t->points());
  CHECK(std::abs(std::sqrt(q) - l2_norm(f)) <= 1e-12 * l2_norm(f));
}

TEST_CASE("heat and Stokes semigroups") {
  const auto t = box();
  const SpectralField f = random_field(t, 2, 8, 1.0, 21, true);
  CHECK(oracle::rel_diff(semigroup_apply(f, 0.0, Semigroup::heat), f) == 0.0);
  CHECK_THROWS_AS(semigroup_apply(f, -0.1, Semigroup::heat), DomainError);

  SpectralField mode = t->zeros(1);
  mode.add_conjugate_pair(0, {0, 1, 0}, Complex(1.0, 0.0));
  const SpectralField e = semigroup_apply(mode, 1.0, Semigroup::heat);
  CHECK(l2_norm(e) == doctest::Approx(std::exp(-1.0) * l2_norm(mode)).epsilon(1e-15));

  for (double a : {0.1, 0.7})
    for (double b : {0.1, 0.7}) {
      const SpectralField ab = semigroup_apply(semigroup_apply(f, a, Semigroup::stokes), b, Semigroup::stokes);
      CHECK(l2_norm(ab - semigroup_apply(f, a + b, Semigroup::stokes)) <= 1e-13 * l2_norm(f));
    }
  for (double s : {0.0, 0.01, 1.0, 50.0}) CHECK(l2_norm(semigroup_apply(f, s, Semigroup::stokes)) <= l2_norm(f));
}

TEST_CASE("dealiasing") {
  const auto t = box();
  const int kc = oracle::cutoff(*t);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  PhysicalField p = t->physical_zeros(1);
  for (double& x : p.data) x = z(rng);
  const SpectralField d = dealias(t->to_spectral(p));
  CHECK(oracle::rel_diff(dealias(d), d) == 0.0);

  // count surviving lattice points directly
  std::size_t survivors = 0;
  for (std::size_t m = 0; m < t->modes(); ++m)
    if (std::abs(d.at(0, m)) > 0.0) survivors += static_cast<std::size_t>(t->weight(m));
  CHECK(survivors == static_cast<std::size_t>((2 * kc + 1) * (2 * kc + 1)));
  CHECK(t->retained_lattice_modes() == survivors);

  // sin^2((n/2 - 1) x1): only the mean 1/2 lies inside the retained band
  const int m = t->n() / 2 - 1;
  const SpectralField s =
      oracle::from_function(t, 1, [m](int, const std::array<double, 3>& x) { return std::sin(m * x[0]); });
  const SpectralField prod = multiply(s, s);
  oracle::FineOp op(t, 2);
  const PhysicalField fs = op.values(s);
  PhysicalField sq(1, fs.points);
  for (std::size_t i = 0; i < fs.points; ++i) sq.at(0, i) = fs.at(0, i) * fs.at(0, i);
  const SpectralField ref = op.back(sq);
  CHECK(oracle::rel_diff(prod, ref) < 1e-10);
  CHECK(std::abs(prod.at(0, 0) - 0.5) < 1e-14);
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(Torus::create(Grid{4, 16, 2.0 / 3.0}), ConfigError);
  CHECK_THROWS_AS(Torus::create(Grid{2, 12, 2.0 / 3.0}), ConfigError);
  CHECK_THROWS_AS(Torus::create(Grid{2, 16, 0.0}), ConfigError);
}
