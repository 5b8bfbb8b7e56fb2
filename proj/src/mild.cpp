#include "nspd/mild.hpp"

#include <cmath>

#include "nspd/error.hpp"
#include "nspd/spectral.hpp"

namespace nspd {

FieldPair semigroup_pair(const FieldPair& y, double t, double gamma) {
  return {semigroup_apply(y.v, t, Semigroup::stokes), director_semigroup(y.d, t, gamma)};
}

double xt_norm(const PairPath& u, double dt, double alpha) {
  if (u.empty()) throw DomainError("xt_norm: empty path");
  std::vector<double> t, vn, en;
  for (std::size_t n = 0; n < u.size(); ++n) {
    t.push_back(static_cast<double>(n) * dt);
    vn.push_back(product_norm(u[n], {SpaceLevel::V, alpha}));
    en.push_back(product_norm(u[n], {SpaceLevel::E, alpha}));
  }
  return std::sqrt(path_norm_accumulate(t, vn, en, t.back()).total());
}

double l2_time_norm(const PairPath& f, double dt, double alpha) {
  if (f.empty()) throw DomainError("l2_time_norm: empty path");
  const std::size_t n = f.size() > 1 ? f.size() - 1 : 1;
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += dt * std::pow(product_norm(f[j], {SpaceLevel::H, alpha}), 2);
  return std::sqrt(s);
}

namespace {

// u_0 = 0, u_{n+1} = S(dt)(u_n + g_n): the left-endpoint convolution sum.
PairPath accumulate(const PairPath& g, std::size_t n_steps, double dt, double gamma) {
  const Torus& t = *g.front().v.torus();
  PairPath u;
  u.reserve(n_steps + 1);
  u.push_back(zero_pair(t));
  for (std::size_t n = 0; n < n_steps; ++n) {
    FieldPair w = u.back();
    w += g[n];
    u.push_back(semigroup_pair(w, dt, gamma));
  }
  return u;
}

}  // namespace

PairPath convolution_S_star(const PairPath& f, double dt, double gamma) {
  if (f.empty()) throw DomainError("convolution_S_star: empty path");
  if (!(dt > 0.0)) throw DomainError("convolution_S_star: dt must be positive");
  // N+1 samples describe N intervals; a single sample is one interval.
  const std::size_t n_steps = f.size() > 1 ? f.size() - 1 : 1;
  PairPath g(f.begin(), f.begin() + static_cast<std::ptrdiff_t>(n_steps));
  for (FieldPair& x : g) x *= dt;
  return accumulate(g, n_steps, dt, gamma);
}

PairPath convolution_S_diamond(const std::vector<std::vector<FieldPair>>& xi,
                               const std::vector<std::vector<double>>& dW, double dt, double gamma) {
  if (dW.empty() || xi.empty()) throw DomainError("convolution_S_diamond: empty path");
  if (xi.size() != dW.size() && xi.size() != dW.size() + 1)
    throw DomainError("convolution_S_diamond: coefficient and increment paths are misaligned");
  PairPath g;
  g.reserve(dW.size());
  for (std::size_t j = 0; j < dW.size(); ++j) {
    if (xi[j].size() != dW[j].size() || xi[j].empty())
      throw DomainError("convolution_S_diamond: mode counts differ at step " + std::to_string(j));
    FieldPair s = zero_pair(*xi[j].front().v.torus());
    for (std::size_t k = 0; k < dW[j].size(); ++k) s.axpy(dW[j][k], xi[j][k]);
    g.push_back(std::move(s));
  }
  return accumulate(g, dW.size(), dt, gamma);
}

PicardResult picard_iterate_mild(const Integrator& integ, const SystemState& y0, const NoisePath& path,
                                 std::size_t n_steps, std::size_t n_iters) {
  if (path.size() < n_steps) throw DomainError("picard_iterate_mild: noise path too short");
  if (n_steps == 0) throw DomainError("picard_iterate_mild: need at least one step");
  const SolverConfig& cfg = integ.config();
  const double dt = path.dt;
  const double gamma = cfg.model.gamma;
  const double alpha = cfg.model.alpha;
  const MagneticField& h = integ.field();
  const bool has_h = !h.is_zero();

  // S(t_n) y0 by repeated application of S(dt) (exact semigroup law).
  PairPath free_flow;
  free_flow.push_back(FieldPair{leray_project(y0.v), y0.d});
  for (std::size_t n = 0; n < n_steps; ++n) free_flow.push_back(semigroup_pair(free_flow.back(), dt, gamma));

  // Phi(u)_n with both convolutions fused into one left-endpoint recursion:
  // w_{n+1} = S(dt)(w_n + dt drift(u_n) + G(u_n) dW_n), w_0 = y0.
  auto phi = [&](const PairPath& u) {
    PairPath g;
    g.reserve(n_steps);
    for (std::size_t n = 0; n < n_steps; ++n) {
      FieldPair f = full_drift_F(u[n], cfg.model);
      if (has_h) f.d -= ito_correction_L(u[n].d, h);  // Ito drift: F - L = F + 1/2 G^2
      f *= dt;
      const NoiseIncrement& inc = path.steps[n];
      if (cfg.noise.sigma != 0.0 && integ.noise_basis().size() > 0) f.v += integ.noise_basis().apply(u[n].v, inc.dW);
      if (has_h && inc.dEta != 0.0) f.d.axpy(inc.dEta, director_noise_G(u[n].d, h));
      g.push_back(std::move(f));
    }
    PairPath w = accumulate(g, n_steps, dt, gamma);
    for (std::size_t n = 0; n <= n_steps; ++n) w[n] += free_flow[n];
    return w;
  };

  auto distance = [&](const PairPath& a, const PairPath& b) {
    PairPath diff;
    diff.reserve(a.size());
    for (std::size_t n = 0; n < a.size(); ++n) diff.push_back(a[n] - b[n]);
    return xt_norm(diff, dt, alpha);
  };

  PicardResult res;
  PairPath u = free_flow;
  for (std::size_t m = 0; m < n_iters; ++m) {
    PairPath next = phi(u);
    const double r = distance(next, u);
    res.residuals.push_back(r);
    u = std::move(next);
    if (!std::isfinite(r) || (res.residuals.front() > 0.0 && r > 1e3 * res.residuals.front())) {
      res.diverged = true;
      break;
    }
  }
  res.mild_residual = res.diverged ? res.residuals.back() : distance(phi(u), u);
  res.fixed_point = std::move(u);
  return res;
}

}  // namespace nspd
