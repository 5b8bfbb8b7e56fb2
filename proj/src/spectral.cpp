#include "nspd/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "nspd/error.hpp"

namespace nspd {

namespace {

const Torus& torus_of(const SpectralField& f) {
  if (!f.torus()) throw ConfigError("spectral field has no grid");
  return *f.torus();
}

}  // namespace

SpectralField gradient(const SpectralField& f) {
  const Torus& t = torus_of(f);
  const int d = t.dim();
  SpectralField out = t.zeros(f.components() * d);
  const Complex i{0.0, 1.0};
  for (int c = 0; c < f.components(); ++c) {
    auto in = f.component(c);
    for (int j = 0; j < d; ++j) {
      auto o = out.component(c * d + j);
      for (std::size_t m = 0; m < t.modes(); ++m) o[m] = i * t.derivative_wavenumber(m, j) * in[m];
    }
  }
  return out;
}

SpectralField divergence(const SpectralField& u) {
  const Torus& t = torus_of(u);
  const int d = t.dim();
  if (u.components() != d) throw ConfigError("divergence: expected a dim-component field");
  SpectralField out = t.zeros(1);
  auto o = out.component(0);
  const Complex i{0.0, 1.0};
  for (int j = 0; j < d; ++j) {
    auto in = u.component(j);
    for (std::size_t m = 0; m < t.modes(); ++m) o[m] += i * t.derivative_wavenumber(m, j) * in[m];
  }
  return out;
}

SpectralField laplacian(const SpectralField& f) {
  const Torus& t = torus_of(f);
  SpectralField out = f;
  for (int c = 0; c < f.components(); ++c) {
    auto o = out.component(c);
    for (std::size_t m = 0; m < t.modes(); ++m) o[m] *= -t.k_squared(m);
  }
  return out;
}

SpectralField leray_project(const SpectralField& u) {
  const Torus& t = torus_of(u);
  const int d = t.dim();
  if (u.components() != d) throw ConfigError("leray_project: expected a dim-component field");
  SpectralField out = t.zeros(d);
  for (std::size_t m = 0; m < t.modes(); ++m) {
    const double k2 = t.k_squared(m);
    if (k2 == 0.0) continue;
    const Wavevector& k = t.wavevector(m);
    Complex kdotu{0.0, 0.0};
    for (int j = 0; j < d; ++j) kdotu += static_cast<double>(k[j]) * u.at(j, m);
    const Complex s = kdotu / k2;
    for (int j = 0; j < d; ++j) out.at(j, m) = u.at(j, m) - static_cast<double>(k[j]) * s;
  }
  return out;
}

double sobolev_norm(const SpectralField& f, double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("sobolev_norm: exponent must be finite and >= 0");
  const Torus& t = torus_of(f);
  double sum = 0.0;
  for (std::size_t m = 0; m < t.modes(); ++m) {
    double a = 0.0;
    for (int c = 0; c < f.components(); ++c) a += std::norm(f.at(c, m));
    if (a == 0.0) continue;
    const double mult = r == 0.0 ? 1.0 : std::pow(1.0 + t.k_squared(m), r);
    sum += t.weight(m) * mult * a;
  }
  return std::sqrt(sum * t.volume());
}

double l2_inner(const SpectralField& f, const SpectralField& g) {
  const Torus& t = torus_of(f);
  if (f.components() != g.components() || f.modes() != g.modes())
    throw ConfigError("l2_inner: shape mismatch");
  double sum = 0.0;
  for (int c = 0; c < f.components(); ++c) {
    auto a = f.component(c);
    auto b = g.component(c);
    for (std::size_t m = 0; m < t.modes(); ++m)
      sum += t.weight(m) * (a[m].real() * b[m].real() + a[m].imag() * b[m].imag());
  }
  return sum * t.volume();
}

double linf_norm(const SpectralField& f) {
  const Torus& t = torus_of(f);
  const PhysicalField p = t.to_physical(f);
  double best = 0.0;
  for (std::size_t i = 0; i < p.points; ++i) {
    double s = 0.0;
    for (int c = 0; c < p.components; ++c) s += p.at(c, i) * p.at(c, i);
    best = std::max(best, s);
  }
  return std::sqrt(best);
}

double divergence_ratio(const SpectralField& u) {
  const Torus& t = torus_of(u);
  const int d = t.dim();
  if (u.components() != d) throw ConfigError("divergence_ratio: expected a dim-component field");
  double worst = 0.0;
  for (std::size_t m = 0; m < t.modes(); ++m) {
    const Wavevector& k = t.wavevector(m);
    Complex s{0.0, 0.0};
    for (int j = 0; j < d; ++j) s += static_cast<double>(k[j]) * u.at(j, m);
    worst = std::max(worst, std::abs(s));
  }
  const double norm = l2_norm(u);
  return norm == 0.0 ? 0.0 : worst / norm;
}

SpectralField semigroup_apply(const SpectralField& f, double t, Semigroup which) {
  if (!(t >= 0.0)) throw DomainError("semigroup_apply: time must be >= 0");
  const Torus& tor = torus_of(f);
  SpectralField out = which == Semigroup::stokes ? leray_project(f) : f;
  if (t == 0.0) return out;
  for (std::size_t m = 0; m < tor.modes(); ++m) {
    const double decay = std::exp(-tor.k_squared(m) * t);
    for (int c = 0; c < out.components(); ++c) out.at(c, m) *= decay;
  }
  return out;
}

void dealias_in_place(SpectralField& f) {
  const Torus& t = torus_of(f);
  for (std::size_t m = 0; m < t.modes(); ++m) {
    if (t.retained(m)) continue;
    for (int c = 0; c < f.components(); ++c) f.at(c, m) = Complex{0.0, 0.0};
  }
}

SpectralField dealias(const SpectralField& f) {
  SpectralField out = f;
  dealias_in_place(out);
  return out;
}

SpectralField multiply(const SpectralField& f, const SpectralField& g) {
  const Torus& t = torus_of(f);
  if (f.components() != 1 || g.components() != 1) throw ConfigError("multiply: expects scalar fields");
  PhysicalField a = t.to_physical_padded(f);
  const PhysicalField b = t.to_physical_padded(g);
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] *= b.data[i];
  SpectralField out = t.from_physical_padded(a);
  dealias_in_place(out);
  return out;
}

void remove_mean(SpectralField& f) {
  // Mode 0 is always the first entry of the half-spectrum table.
  for (int c = 0; c < f.components(); ++c) f.at(c, 0) = Complex{0.0, 0.0};
}

}  // namespace nspd
