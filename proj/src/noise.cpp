#include "nspd/noise.hpp"

#include <algorithm>
#include <cmath>

#include "nspd/error.hpp"
#include "nspd/spectral.hpp"

namespace nspd {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix64(mix64(mix64(mix64(seed) ^ a) ^ b) ^ c);
}

NoiseIncrement sample_increment(std::uint64_t step, double dt, const NoiseConfig& cfg, std::uint64_t traj) {
  if (!(dt > 0.0)) throw DomainError("sample_increment: dt must be positive");
  NormalStream z(stream_key(cfg.seed, traj, step));
  const double s = std::sqrt(dt);
  NoiseIncrement inc;
  // eta first, so the scalar path does not depend on n_modes
  inc.dEta = s * z();
  inc.dW.resize(cfg.n_modes);
  for (double& w : inc.dW) w = s * z();
  return inc;
}

namespace {

Wavevector canonical(const Wavevector& k, int dim) {
  for (int j = 0; j < dim; ++j) {
    if (k[j] > 0) return k;
    if (k[j] < 0) return {-k[0], -k[1], -k[2]};
  }
  return k;
}

std::vector<Wavevector> retained_half_lattice(const Torus& t) {
  std::vector<Wavevector> out;
  const int dim = t.dim();
  for (std::size_t m = 0; m < t.modes(); ++m) {
    if (!t.retained(m) || t.k_squared(m) == 0.0) continue;
    const Wavevector& k = t.wavevector(m);
    if (canonical(k, dim) == k) out.push_back(k);
    // On self-conjugate slices -k is stored too; its canonical image is
    // collected when the loop reaches it.
  }
  std::sort(out.begin(), out.end(), [](const Wavevector& a, const Wavevector& b) {
    const int a2 = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
    const int b2 = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
    return a2 != b2 ? a2 < b2 : a < b;
  });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::array<double, 3>> polarizations(const Wavevector& k, int dim) {
  const double kn = std::sqrt(static_cast<double>(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]));
  if (dim == 2) return {{-k[1] / kn, k[0] / kn, 0.0}};
  const std::array<double, 3> kh{k[0] / kn, k[1] / kn, k[2] / kn};
  int axis = 0;
  for (int j = 1; j < 3; ++j)
    if (std::abs(k[j]) < std::abs(k[axis])) axis = j;
  std::array<double, 3> a{0.0, 0.0, 0.0};
  a[axis] = 1.0;
  std::array<double, 3> e1{kh[1] * a[2] - kh[2] * a[1], kh[2] * a[0] - kh[0] * a[2], kh[0] * a[1] - kh[1] * a[0]};
  const double n1 = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
  for (double& x : e1) x /= n1;
  const std::array<double, 3> e2{kh[1] * e1[2] - kh[2] * e1[1], kh[2] * e1[0] - kh[0] * e1[2],
                                 kh[0] * e1[1] - kh[1] * e1[0]};
  return {e1, e2};
}

}  // namespace

std::size_t NoiseBasis::available(const Torus& torus) {
  return 2 * retained_half_lattice(torus).size() * static_cast<std::size_t>(torus.dim() - 1);
}

NoiseBasis::NoiseBasis(std::shared_ptr<const Torus> torus, const NoiseConfig& cfg, double alpha)
    : torus_(std::move(torus)), alpha_(alpha), gain_(cfg.multiplicative_gain) {
  const int dim = torus_->dim();
  if (!(cfg.decay_s > alpha + dim / 2.0))
    throw ConfigError("noise decay_s must exceed alpha + dim/2 for a Hilbert-Schmidt coefficient");
  const double c = std::sqrt(torus_->volume() / 2.0);
  for (const Wavevector& k : retained_half_lattice(*torus_)) {
    if (entries_.size() >= cfg.n_modes) break;
    const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    const double q = cfg.sigma * std::pow(1.0 + k2, -cfg.decay_s / 2.0);
    for (const auto& e : polarizations(k, dim)) {
      for (int phase = 0; phase < 2 && entries_.size() < cfg.n_modes; ++phase) {
        // cos -> 1/2, sin -> -i/2 on exp(i k.x)
        const Complex f = phase == 0 ? Complex{0.5 / c, 0.0} : Complex{0.0, -0.5 / c};
        Entry en{k, 0, false, {f * e[0], f * e[1], f * e[2]}, q, k2};
        if (!torus_->locate(k, en.index, en.conjugated)) throw ConfigError("noise basis: mode outside grid");
        entries_.push_back(en);
      }
    }
  }
  if (entries_.size() < cfg.n_modes)
    throw ConfigError("noise n_modes exceeds the " + std::to_string(available(*torus_)) +
                      " available basis fields");
}

SpectralField NoiseBasis::basis_field(std::size_t j) const {
  SpectralField out = torus_->zeros(torus_->dim());
  const Entry& e = entries_.at(j);
  for (int c = 0; c < torus_->dim(); ++c) out.add_conjugate_pair(c, e.k, e.amp[c]);
  return out;
}

double NoiseBasis::rho(const SpectralField& v) const {
  const double n = sobolev_norm(v, alpha_);
  return n / (1.0 + n);
}

SpectralField NoiseBasis::apply_scaled(double factor, const std::vector<double>& dW) const {
  if (dW.size() != entries_.size()) throw ConfigError("apply_Q: increment length does not match n_modes");
  SpectralField out = torus_->zeros(torus_->dim());
  for (std::size_t j = 0; j < entries_.size(); ++j) {
    const double s = factor * entries_[j].q * dW[j];
    if (s == 0.0) continue;
    for (int c = 0; c < torus_->dim(); ++c) out.add_conjugate_pair(c, entries_[j].k, s * entries_[j].amp[c]);
  }
  return out;
}

SpectralField NoiseBasis::apply(const SpectralField& v, const std::vector<double>& dW) const {
  const double factor = gain_ == 0.0 ? 1.0 : 1.0 + gain_ * rho(v);
  return apply_scaled(factor, dW);
}

double NoiseBasis::hs_norm_squared(const SpectralField& v) const {
  const double f = gain_ == 0.0 ? 1.0 : 1.0 + gain_ * rho(v);
  double s = 0.0;
  for (const Entry& e : entries_) s += e.q * e.q * std::pow(1.0 + e.k2, alpha_);
  return f * f * s;
}

double NoiseBasis::ell0() const {
  double s = 0.0;
  for (const Entry& e : entries_) s += e.q * e.q * std::pow(1.0 + e.k2, alpha_);
  return (1.0 + gain_) * (1.0 + gain_) * s;
}

double NoiseBasis::lipschitz() const {
  double best = 0.0;
  for (const Entry& e : entries_) best = std::max(best, e.q * std::pow(1.0 + e.k2, alpha_ / 2.0));
  return gain_ * best;
}

NoisePath generate_path(const NoiseConfig& cfg, double dt, std::size_t n_steps, std::uint64_t traj) {
  NoisePath p;
  p.dt = dt;
  p.n_modes = cfg.n_modes;
  p.key = stream_key(cfg.seed, traj, 0x6272696467650000ULL);
  p.steps.reserve(n_steps);
  for (std::size_t i = 0; i < n_steps; ++i) p.steps.push_back(sample_increment(i, dt, cfg, traj));
  return p;
}

NoisePath brownian_bridge_refine(const NoisePath& path, std::size_t factor) {
  if (factor == 0 || (factor & (factor - 1)) != 0)
    throw DomainError("brownian_bridge_refine: factor must be a power of two");
  NoisePath cur = path;
  for (std::size_t f = factor; f > 1; f /= 2) {
    NoisePath next;
    next.dt = cur.dt / 2.0;
    next.n_modes = cur.n_modes;
    next.key = cur.key;
    next.level = cur.level + 1;
    next.steps.reserve(2 * cur.size());
    const double s = std::sqrt(cur.dt) / 2.0;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      NormalStream z(stream_key(cur.key, static_cast<std::uint64_t>(cur.level), i));
      const NoiseIncrement& in = cur.steps[i];
      NoiseIncrement a, b;
      const double ze = s * z();
      a.dEta = 0.5 * in.dEta + ze;
      b.dEta = 0.5 * in.dEta - ze;
      a.dW.resize(in.dW.size());
      b.dW.resize(in.dW.size());
      for (std::size_t j = 0; j < in.dW.size(); ++j) {
        const double zw = s * z();
        a.dW[j] = 0.5 * in.dW[j] + zw;
        b.dW[j] = 0.5 * in.dW[j] - zw;
      }
      next.steps.push_back(std::move(a));
      next.steps.push_back(std::move(b));
    }
    cur = std::move(next);
  }
  return cur;
}

NoisePath coarsen(const NoisePath& path, std::size_t factor) {
  if (factor == 0 || path.size() % factor != 0) throw DomainError("coarsen: factor must divide the path length");
  NoisePath out;
  out.dt = path.dt * static_cast<double>(factor);
  out.n_modes = path.n_modes;
  out.key = path.key;
  out.level = path.level;
  for (std::size_t i = 0; i < path.size(); i += factor) {
    NoiseIncrement s;
    s.dW.assign(path.n_modes, 0.0);
    for (std::size_t r = 0; r < factor; ++r) {
      s.dEta += path.steps[i + r].dEta;
      for (std::size_t j = 0; j < path.n_modes; ++j) s.dW[j] += path.steps[i + r].dW[j];
    }
    out.steps.push_back(std::move(s));
  }
  return out;
}

}  // namespace nspd
