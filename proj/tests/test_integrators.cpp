#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "nspd/diagnostics.hpp"
#include "nspd/error.hpp"
#include "nspd/integrators.hpp"
#include "nspd/spectral.hpp"
#include "nspd/studies.hpp"
#include "oracles.hpp"

using namespace nspd;

namespace {

SolverConfig small(int n = 16) {
  SolverConfig c;
  c.grid = Grid{2, n, 2.0 / 3.0};
  c.scheme.dt = 1e-3;
  c.scheme.t_max = 0.05;
  c.noise.n_modes = 4;
  return c;
}

SolverConfig linear_noise_free(int n = 16) {
  SolverConfig c = small(n);
  c.model.convection = c.model.stress = c.model.director_convection = c.model.ginzburg = false;
  c.noise.sigma = 0.0;
  c.field.constant = {0, 0, 0};
  c.field.modes.clear();
  return c;
}

SpectralField planar(const std::shared_ptr<const Torus>& t) {
  return oracle::from_function(t, 3, [](int c, const std::array<double, 3>& x) {
    return c == 0 ? std::cos(x[0]) : c == 1 ? std::sin(x[0]) : 0.0;
  });
}

}  // namespace

TEST_CASE("velocity step") {
  const SolverConfig c = linear_noise_free();
  const Integrator integ(c);
  const auto& t = integ.torus();
  NoiseIncrement inc{std::vector<double>(c.noise.n_modes, 0.0), 0.0};
  SystemState y{0.0, t->zeros(2), t->zeros(3)};
  CHECK(l2_norm(integ.step_velocity(y, t->zeros(2), inc, 0.01)) == 0.0);

  y.v.add_conjugate_pair(0, {0, 1, 0}, Complex(0.5, 0.0));  // solenoidal, |k| = 1
  const SpectralField v1 = integ.step_velocity(y, t->zeros(2), inc, 0.01);
  CHECK(l2_norm(v1) == doctest::Approx(std::exp(-0.01) * l2_norm(y.v)).epsilon(1e-14));
}

TEST_CASE("velocity noise alone reaches the Ornstein-Uhlenbeck variance") {
  SolverConfig c = linear_noise_free();
  c.noise.sigma = 0.4;
  c.noise.n_modes = 2;
  const Integrator integ(c);
  const auto& t = integ.torus();
  const NoiseBasis& b = integ.noise_basis();
  const SpectralField psi = b.basis_field(0);
  double k2 = 0.0;
  for (int j = 0; j < 2; ++j) k2 += double(b.wavevector(0)[j]) * b.wavevector(0)[j];
  const double want = b.q(0) * b.q(0) / (2 * k2);

  const double dt = 0.01;
  const int steps = static_cast<int>(6.0 / k2 / dt);
  const int paths = 1000;
  double s2 = 0.0, s4 = 0.0;
  for (int p = 0; p < paths; ++p) {
    SystemState y{0.0, t->zeros(2), t->zeros(3)};
    for (int i = 0; i < steps; ++i)
      y.v = integ.step_velocity(y, t->zeros(2), sample_increment(i, dt, c.noise, p), dt);
    const double a = l2_inner(y.v, psi);
    s2 += a * a;
    s4 += a * a * a * a;
  }
  const double var = s2 / paths;
  const double se = std::sqrt((s4 / paths - var * var) / paths);
  CHECK(std::abs(var - want) < 3 * se);
}

TEST_CASE("deterministic director step") {
  SUBCASE("constant director at rest is an equilibrium") {
    const SolverConfig c = small();
    const Integrator integ(c);
    const auto& t = integ.torus();
    SystemState y{0.0, t->zeros(2), oracle::from_function(t, 3, [](int k, const std::array<double, 3>&) {
                    return k == 2 ? 1.0 : 0.0;
                  })};
    CHECK(l2_norm(integ.step_director_deterministic(y, 0.01) - y.d) < 1e-15);
  }
  SUBCASE("planar stationary solution: one-step error is second order") {
    const SolverConfig c = small(32);
    const Integrator integ(c);
    const auto& t = integ.torus();
    const SystemState y{0.0, t->zeros(2), planar(t)};
    std::vector<double> dts, errs;
    for (double dt : {0.04, 0.02, 0.01, 0.005}) {
      dts.push_back(dt);
      errs.push_back(l2_norm(integ.step_director_deterministic(y, dt) - y.d));
    }
    CHECK(loglog_slope(dts, errs) >= 2.0 - 0.05);
  }
  SUBCASE("heat-only limit is the semigroup") {
    const SolverConfig c = linear_noise_free();
    const Integrator integ(c);
    const auto& t = integ.torus();
    const SystemState y{0.0, t->zeros(2), random_field(t, 3, 4, 1.0, 3)};
    CHECK(oracle::rel_diff(integ.step_director_deterministic(y, 0.02),
                           semigroup_apply(y.d, 0.02 * c.model.gamma, Semigroup::heat)) < 1e-15);
  }
}

TEST_CASE("director noise steps on fields") {
  SolverConfig c = small(32);
  c.field.modes.push_back(FieldMode{0, {1, 1, 0}, 0.7, -0.2});
  const Integrator integ(c);
  const auto& t = integ.torus();
  const SpectralField d = random_field(t, 3, 5, 1.0, 8);
  CHECK(oracle::rel_diff(integ.step_director_noise_rotation(d, 0.0), d) < 1e-15);

  const PhysicalField before = t->to_physical(d);
  const PhysicalField after = t->to_physical(integ.step_director_noise_rotation(d, 0.37));
  double worst = 0.0;
  for (std::size_t p = 0; p < before.points; ++p) {
    double a = 0.0, b = 0.0;
    for (int k = 0; k < 3; ++k) {
      a += before.at(k, p) * before.at(k, p);
      b += after.at(k, p) * after.at(k, p);
    }
    worst = std::max(worst, std::abs(std::sqrt(b) - std::sqrt(a)) / std::sqrt(a));
  }
  CHECK(worst <= 1e-14);

  SolverConfig z = small();
  z.field.constant = {0, 0, 0};
  z.field.modes.clear();
  const Integrator none(z);
  const SpectralField e = random_field(none.torus(), 3, 3, 1.0, 9);
  CHECK(oracle::rel_diff(none.step_director_noise_ito(e, 0.2, 0.01), e) < 1e-15);
}

TEST_CASE("trajectories") {
  SUBCASE("zero data and zero noise stay zero") {
    SolverConfig c = linear_noise_free();
    c.model = ModelParams{};
    c.initial.taylor_green_amplitude = 0.0;
    c.initial.director_epsilon = 0.0;
    const TrajectoryRecord r = run_trajectory(c);
    CHECK(r.status == RunStatus::completed);
    CHECK(r.steps_taken == c.scheme.steps());
    for (const auto& row : r.rows) CHECK(row.energy == 0.0);
  }
  SUBCASE("thresholds below the initial norm stop at once") {
    SolverConfig c = small();
    c.thresholds = {0.01, 0.02, 0.03};
    const TrajectoryRecord r = run_trajectory(c);
    CHECK(r.status == RunStatus::stopped_at_threshold);
    CHECK(r.steps_taken == 0);
    for (double tau : r.tau) CHECK(tau == 0.0);
  }
  SUBCASE("crossings are ordered") {
    SolverConfig c = small();
    c.initial.taylor_green_amplitude = 3.0;
    c.scheme.t_max = 0.2;
    const double v0 = run_trajectory(c, RunOptions{.t_end = 0.0}).rows.front().v_norm;
    c.thresholds = {v0 * 0.5, v0 * 0.9, v0 * 1.01};
    const TrajectoryRecord r = run_trajectory(c);
    for (std::size_t m = 1; m < r.tau.size(); ++m)
      if (!std::isnan(r.tau[m])) CHECK(r.tau[m] >= r.tau[m - 1]);
    CHECK(r.tau[0] == 0.0);
    for (std::size_t i = 1; i < r.rows.size(); ++i) CHECK(r.rows[i].t > r.rows[i - 1].t);
  }
  SUBCASE("overflow is a numerical failure that crosses every threshold") {
    SolverConfig c = small();
    c.initial.taylor_green_amplitude = 1e150;
    c.thresholds = {1e300, 1e301, 1e302};
    const TrajectoryRecord r = run_trajectory(c);
    CHECK(r.status == RunStatus::numerical_failure);
    REQUIRE(r.failure_step.has_value());
    for (double tau : r.tau) CHECK_FALSE(std::isnan(tau));
  }
  SUBCASE("bit-identical repeats, stride and snapshots") {
    SolverConfig c = small();
    c.output.record_stride = 7;
    c.output.snapshot_stride = 10;
    const TrajectoryRecord a = run_trajectory(c), b = run_trajectory(c);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      CHECK(a.rows[i].v_norm == b.rows[i].v_norm);
      CHECK(a.rows[i].max_constraint_dev == b.rows[i].max_constraint_dev);
    }
    CHECK(a.rows.size() == 1 + 50 / 7 + 1);
    CHECK(a.snapshots.size() == 6);
    CHECK(a.config_hash == config_hash(c));
  }
  SUBCASE("renormalized runs keep the unit sphere") {
    SolverConfig c = small(32);
    c.scheme.renormalize_director = true;
    c.noise.sigma = 0.2;
    const TrajectoryRecord r = run_trajectory(c);
    CHECK(r.max_constraint_dev <= 1e-12);
    CHECK(r.max_divergence_ratio <= 1e-12);
  }
  SUBCASE("small noise-free data decay in V after a transient") {
    SolverConfig c = small(32);
    c.noise.sigma = 0.0;
    c.field.constant = {0, 0, 0};
    c.field.modes.clear();
    c.scheme.t_max = 0.5;
    c.output.record_stride = 50;
    const TrajectoryRecord r = run_trajectory(c);
    CHECK(r.status == RunStatus::completed);
    for (std::size_t i = 2; i < r.rows.size(); ++i) CHECK(r.rows[i].v_norm <= r.rows[i - 1].v_norm);
  }
}

TEST_CASE("weak consistency of the two director-noise forms") {
  const WeakConsistency w = weak_consistency_study(10000, {2, 4, 8, 16}, 1.0, 5);
  CHECK(w.slope >= 0.9);
  // the leading difference is e^{-T/2} - (1 - dt/2)^{T/dt}
  for (std::size_t i = 0; i < w.dt.size(); ++i) {
    const double exact = std::exp(-0.5) - std::pow(1.0 - w.dt[i] / 2, 1.0 / w.dt[i]);
    CHECK(std::abs(w.difference[i] - exact) < 4 * w.std_error[i] + 1e-12);
  }
  const WeakConsistency bad = weak_consistency_study(2000, {2, 4, 8, 16}, 1.0, 5, -1.0);
  CHECK(bad.slope < 0.5);
}
