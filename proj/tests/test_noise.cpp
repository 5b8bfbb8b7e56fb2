#include <doctest.h>

#include <cmath>

#include "nspd/diagnostics.hpp"
#include "nspd/error.hpp"
#include "nspd/noise.hpp"
#include "nspd/spectral.hpp"

using namespace nspd;

namespace {

NoiseConfig noise(std::size_t modes = 6, double gain = 0.0) {
  NoiseConfig c;
  c.n_modes = modes;
  c.sigma = 0.3;
  c.decay_s = 4.0;
  c.multiplicative_gain = gain;
  c.seed = 42;
  return c;
}

}  // namespace

TEST_CASE("increments: determinism and domain") {
  const NoiseConfig c = noise();
  const NoiseIncrement a = sample_increment(17, 1e-3, c, 3);
  const NoiseIncrement b = sample_increment(17, 1e-3, c, 3);
  CHECK(a.dW == b.dW);
  CHECK(a.dEta == b.dEta);
  CHECK(a.dW.size() == c.n_modes);
  CHECK(sample_increment(18, 1e-3, c, 3).dEta != a.dEta);
  CHECK(sample_increment(17, 1e-3, c, 4).dEta != a.dEta);
  CHECK_THROWS_AS(sample_increment(0, 0.0, c), DomainError);
  CHECK_THROWS_AS(sample_increment(0, -1e-3, c), DomainError);
}

TEST_CASE("increments: variance dt and independent modes") {
  const NoiseConfig c = noise(3);
  const double dt = 2e-3;
  const int N = 100000;
  double s0 = 0.0, s1 = 0.0, se = 0.0, s01 = 0.0, s0e = 0.0;
  for (int i = 0; i < N; ++i) {
    const NoiseIncrement inc = sample_increment(static_cast<std::uint64_t>(i), dt, c);
    s0 += inc.dW[0] * inc.dW[0];
    s1 += inc.dW[1] * inc.dW[1];
    se += inc.dEta * inc.dEta;
    s01 += inc.dW[0] * inc.dW[1];
    s0e += inc.dW[0] * inc.dEta;
  }
  const double se_var = dt * std::sqrt(2.0 / N);
  CHECK(std::abs(s0 / N - dt) < 3 * se_var);
  CHECK(std::abs(s1 / N - dt) < 3 * se_var);
  CHECK(std::abs(se / N - dt) < 3 * se_var);
  const double se_corr = 1.0 / std::sqrt(static_cast<double>(N));
  CHECK(std::abs(s01 / N / dt) < 3 * se_corr);
  CHECK(std::abs(s0e / N / dt) < 3 * se_corr);
}

TEST_CASE("noise basis construction") {
  const auto t = Torus::create(Grid{2, 16, 2.0 / 3.0});
  NoiseConfig c = noise();
  c.decay_s = 2.9;  // must exceed alpha + d/2 = 3
  CHECK_THROWS_AS(NoiseBasis(t, c, 2.0), ConfigError);
  c = noise(NoiseBasis::available(*t) + 1);
  CHECK_THROWS_AS(NoiseBasis(t, c, 2.0), ConfigError);

  const NoiseBasis b(t, noise(NoiseBasis::available(*t)), 2.0);
  for (std::size_t j = 0; j < b.size(); ++j) {
    const SpectralField f = b.basis_field(j);
    CHECK(divergence_ratio(f) < 1e-15);
    CHECK(l2_norm(f) == doctest::Approx(1.0).epsilon(1e-14));
    double k2 = 0.0;
    for (int i = 0; i < 2; ++i) k2 += double(b.wavevector(j)[i]) * b.wavevector(j)[i];
    CHECK(b.q(j) == doctest::Approx(0.3 * std::pow(1.0 + k2, -2.0)).epsilon(1e-14));
    if (j > 0) {
      double kp = 0.0;
      for (int i = 0; i < 2; ++i) kp += double(b.wavevector(j - 1)[i]) * b.wavevector(j - 1)[i];
      CHECK(kp <= k2);
    }
  }
}

TEST_CASE("apply_Q") {
  const auto t = Torus::create(Grid{2, 32, 2.0 / 3.0});
  const SpectralField v = random_field(t, 2, 6, 1.0, 5, true);
  const NoiseIncrement inc = sample_increment(3, 0.01, noise());

  SUBCASE("zero increment gives zero") {
    const NoiseBasis b(t, noise(6, 0.5), 2.0);
    CHECK(l2_norm(b.apply(v, std::vector<double>(6, 0.0))) == 0.0);
  }
  SUBCASE("additive noise does not see v") {
    const NoiseBasis b(t, noise(), 2.0);
    CHECK(l2_norm(apply_Q(b, v, inc) - apply_Q(b, 5.0 * v, inc)) == 0.0);
    const SpectralField q = apply_Q(b, v, inc);
    CHECK(divergence_ratio(q) < 1e-15);
    CHECK(q.at(0, 0) == Complex(0.0, 0.0));
  }
  SUBCASE("Hilbert-Schmidt growth by direct summation") {
    const NoiseBasis b(t, noise(12, 0.8), 2.0);
    for (double scale : {0.0, 0.1, 1.0, 10.0}) {
      const SpectralField w = scale * v;
      const double hv = sobolev_norm(w, 2.0);
      const double rho = hv / (1.0 + hv);
      double direct = 0.0;
      for (std::size_t j = 0; j < b.size(); ++j)
        direct += std::pow(b.q(j) * (1.0 + 0.8 * rho) * sobolev_norm(b.basis_field(j), 2.0), 2);
      CHECK(b.hs_norm_squared(w) == doctest::Approx(direct).epsilon(1e-12));
      CHECK(direct <= b.ell0() * (1.0 + hv * hv));
    }
  }
  SUBCASE("Lipschitz in v") {
    const NoiseBasis b(t, noise(12, 0.8), 2.0);
    for (std::uint64_t s = 0; s < 20; ++s) {
      const SpectralField v1 = random_field(t, 2, 6, 1.0, 100 + s, true);
      SpectralField v2 = random_field(t, 2, 6, 1.0, 200 + s, true);
      v2 *= 0.01 * static_cast<double>(s);
      const NoiseIncrement e = sample_increment(s, 1.0, noise(12));
      double en = 0.0;
      for (double x : e.dW) en += x * x;
      const double lhs = sobolev_norm(b.apply(v1, e.dW) - b.apply(v2, e.dW), 2.0);
      CHECK(lhs <= b.lipschitz() * sobolev_norm(v1 - v2, 2.0) * std::sqrt(en) * (1 + 1e-12));
    }
  }
}

TEST_CASE("Brownian bridge refinement") {
  const NoiseConfig c = noise(2);
  const NoisePath p = generate_path(c, 0.125, 8, 1);
  SUBCASE("factor 1 is the identity") {
    const NoisePath q = brownian_bridge_refine(p, 1);
    REQUIRE(q.size() == p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      CHECK(q.steps[i].dEta == p.steps[i].dEta);
      CHECK(q.steps[i].dW == p.steps[i].dW);
    }
  }
  SUBCASE("coarse sums are preserved and refinements compose") {
    const NoisePath q4 = brownian_bridge_refine(p, 4);
    const NoisePath q22 = brownian_bridge_refine(brownian_bridge_refine(p, 2), 2);
    REQUIRE(q4.size() == 32);
    CHECK(q4.dt == 0.125 / 4);
    for (std::size_t i = 0; i < q4.size(); ++i) {
      CHECK(q4.steps[i].dEta == q22.steps[i].dEta);
      CHECK(q4.steps[i].dW == q22.steps[i].dW);
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      double e = 0.0, w = 0.0;
      for (std::size_t r = 0; r < 4; ++r) {
        e += q4.steps[4 * i + r].dEta;
        w += q4.steps[4 * i + r].dW[1];
      }
      CHECK(std::abs(e - p.steps[i].dEta) < 1e-15);
      CHECK(std::abs(w - p.steps[i].dW[1]) < 1e-15);
    }
    const NoisePath back = coarsen(q4, 4);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::abs(back.steps[i].dEta - p.steps[i].dEta) < 1e-15);
  }
  SUBCASE("non power of two is refused") {
    CHECK_THROWS_AS(brownian_bridge_refine(p, 3), DomainError);
    CHECK_THROWS_AS(brownian_bridge_refine(p, 0), DomainError);
  }
  SUBCASE("quadratic variation over [0, 1]") {
    const int paths = 1000;
    double mean = 0.0;
    for (int k = 0; k < paths; ++k) {
      const NoisePath q = brownian_bridge_refine(generate_path(c, 0.125, 8, static_cast<std::uint64_t>(k)), 8);
      double qv = 0.0;
      for (const auto& s : q.steps) qv += s.dEta * s.dEta;
      mean += qv;
    }
    mean /= paths;
    // 64 increments of variance 1/64: Var(QV) = 2/64
    CHECK(std::abs(mean - 1.0) < 3.0 * std::sqrt(2.0 / 64.0 / paths));
  }
  SUBCASE("midpoint conditional variance") {
    // Given the coarse increment, each half has variance dt/4 about D/2.
    const int paths = 20000;
    double s = 0.0;
    for (int k = 0; k < paths; ++k) {
      const NoisePath coarse = generate_path(c, 0.5, 1, static_cast<std::uint64_t>(k));
      const NoisePath q = brownian_bridge_refine(coarse, 2);
      const double dev = q.steps[0].dEta - coarse.steps[0].dEta / 2;
      s += dev * dev;
    }
    const double want = 0.5 / 4;
    CHECK(std::abs(s / paths - want) < 3.0 * want * std::sqrt(2.0 / paths));
  }
}
