#include "nspd/studies.hpp"

#include <algorithm>
#include <cmath>

#include "nspd/diagnostics.hpp"
#include "nspd/error.hpp"
#include "nspd/integrators.hpp"
#include "nspd/mild.hpp"
#include "nspd/noise.hpp"

namespace nspd {

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("loglog_slope: need two or more points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

WeakConsistency weak_consistency_study(std::size_t n_paths, const std::vector<std::size_t>& steps, double t_end,
                                       std::uint64_t seed, double correction_sign) {
  if (n_paths < 2 || steps.empty()) throw DomainError("weak_consistency_study: need paths and step counts");
  const std::size_t finest = *std::max_element(steps.begin(), steps.end());
  for (std::size_t n : steps)
    if (n == 0 || finest % n != 0) throw DomainError("weak_consistency_study: step counts must divide the finest");
  const Vec3 h{1.0, 0.0, 0.0};
  const Vec3 d0{0.0, 0.0, 1.0};
  const double fine_dt = t_end / static_cast<double>(finest);

  const std::size_t L = steps.size();
  std::vector<double> sd(L, 0.0), sx(L, 0.0), sdd(L, 0.0), sxx(L, 0.0), sdx(L, 0.0);
  std::vector<double> fine(finest);
  for (std::size_t p = 0; p < n_paths; ++p) {
    NormalStream z(stream_key(seed, p));
    for (double& e : fine) e = std::sqrt(fine_dt) * z();
    for (std::size_t l = 0; l < L; ++l) {
      const std::size_t n = steps[l];
      const std::size_t group = finest / n;
      const double dt = t_end / static_cast<double>(n);
      Vec3 rot = d0, ito = d0;
      double qv = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double de = 0.0;
        for (std::size_t r = 0; r < group; ++r) de += fine[i * group + r];
        rot = rotate_point(rot, h, de);
        ito = ito_point(ito, h, de, dt, 1, correction_sign);
        qv += de * de - dt;
      }
      const double d = rot[2] - ito[2];
      const double x = rot[2] * qv;
      sd[l] += d;
      sx[l] += x;
      sdd[l] += d * d;
      sxx[l] += x * x;
      sdx[l] += d * x;
    }
  }

  WeakConsistency out;
  const double np = static_cast<double>(n_paths);
  for (std::size_t l = 0; l < L; ++l) {
    const double dt = t_end / static_cast<double>(steps[l]);
    const double md = sd[l] / np, mx = sx[l] / np;
    const double vx = sxx[l] / np - mx * mx;
    const double cdx = sdx[l] / np - md * mx;
    const double beta = vx > 0.0 ? cdx / vx : 0.0;
    const double ex = -t_end * dt * std::exp(-t_end / 2.0);
    const double est = md - beta * (mx - ex);
    const double vd = sdd[l] / np - md * md;
    const double resid = std::max(0.0, vd - 2.0 * beta * cdx + beta * beta * vx);
    out.dt.push_back(dt);
    out.difference.push_back(est);
    out.std_error.push_back(std::sqrt(resid / (np - 1.0)));
  }
  std::vector<double> mag;
  for (double d : out.difference) mag.push_back(std::max(std::abs(d), 1e-300));
  out.slope = loglog_slope(out.dt, mag);
  return out;
}

namespace {

std::size_t steps_for(double t_end, double dt) {
  const double r = t_end / dt;
  const auto n = static_cast<std::size_t>(std::llround(r));
  if (n == 0 || std::abs(r - static_cast<double>(n)) > 1e-9 * r)
    throw ConfigError("time horizon is not a multiple of dt");
  return n;
}

std::size_t power_of_two_ratio(double coarse, double fine) {
  const auto r = static_cast<std::size_t>(std::llround(coarse / fine));
  if (r == 0 || (r & (r - 1)) != 0 || std::abs(coarse / fine - static_cast<double>(r)) > 1e-9 * r)
    throw ConfigError("time steps must differ by powers of two");
  return r;
}

SystemState advance(const Integrator& integ, SystemState y, const NoisePath& path, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) integ.step(y, path.steps[i], path.dt, i);
  return y;
}

}  // namespace

ConvergenceReport convergence_study(const SolverConfig& base) {
  validate_config(base);
  std::vector<double> dts = base.convergence.dt_list;
  std::sort(dts.begin(), dts.end(), std::greater<>());
  const double T = base.scheme.t_max;
  const double dt0 = dts.front();
  const std::size_t n0 = steps_for(T, dt0);
  const double dt_ref = dts.back() / static_cast<double>(base.convergence.reference_refinement);

  const auto torus = Torus::create(base.grid);
  auto integrator_for = [&](double dt) {
    SolverConfig c = base;
    c.scheme.dt = dt;
    c.scheme.t_max = T;
    return Integrator(c, torus);
  };
  std::vector<Integrator> integs;
  for (double dt : dts) integs.push_back(integrator_for(dt));
  const Integrator ref = integrator_for(dt_ref);
  const SystemState y0 = make_initial_state(torus, base.initial);
  const double alpha = base.model.alpha;

  ConvergenceReport rep;
  rep.dt = dts;
  rep.reference_dt = dt_ref;
  rep.paths = std::max<std::size_t>(1, base.convergence.paths);
  rep.strong_error.assign(dts.size(), 0.0);
  rep.constraint_drift.assign(dts.size(), 0.0);
  for (std::size_t p = 0; p < rep.paths; ++p) {
    const NoisePath coarse = generate_path(base.noise, dt0, n0, p);
    const NoisePath fine = brownian_bridge_refine(coarse, power_of_two_ratio(dt0, dt_ref));
    const SystemState yr = advance(ref, y0, fine, fine.size());
    for (std::size_t l = 0; l < dts.size(); ++l) {
      const NoisePath path = brownian_bridge_refine(coarse, power_of_two_ratio(dt0, dts[l]));
      const SystemState y = advance(integs[l], y0, path, path.size());
      const double e = product_norm(as_pair(y) - as_pair(yr), {SpaceLevel::V, alpha});
      rep.strong_error[l] += e * e;
      rep.constraint_drift[l] += constraint_report(y.d).max_pointwise_dev;
    }
  }
  for (std::size_t l = 0; l < dts.size(); ++l) {
    rep.strong_error[l] = std::sqrt(rep.strong_error[l] / static_cast<double>(rep.paths));
    rep.constraint_drift[l] /= static_cast<double>(rep.paths);
  }
  auto slope_or_nan = [&](const std::vector<double>& e) {
    for (double x : e)
      if (!(x > 0.0)) return std::nan("");
    return loglog_slope(rep.dt, e);
  };
  rep.strong_slope = slope_or_nan(rep.strong_error);
  rep.drift_slope = slope_or_nan(rep.constraint_drift);
  return rep;
}

PicardAgreement picard_agreement(const SolverConfig& base, double t_end, const std::vector<double>& dt_list,
                                 std::size_t paths, std::size_t n_iters) {
  if (dt_list.empty() || paths == 0) throw DomainError("picard_agreement: empty study");
  std::vector<double> dts = dt_list;
  std::sort(dts.begin(), dts.end(), std::greater<>());
  SolverConfig cfg = base;
  cfg.scheme.variant = NoiseVariant::ito_plus_correction;
  cfg.scheme.renormalize_director = false;
  cfg.scheme.t_max = t_end;
  const auto torus = Torus::create(cfg.grid);
  const SystemState y0 = make_initial_state(torus, cfg.initial);
  const double alpha = cfg.model.alpha;
  const std::size_t n0 = steps_for(t_end, dts.front());

  PicardAgreement out;
  out.dt = dts;
  out.difference.assign(dts.size(), 0.0);
  for (std::size_t p = 0; p < paths; ++p) {
    const NoisePath coarse = generate_path(cfg.noise, dts.front(), n0, p);
    for (std::size_t l = 0; l < dts.size(); ++l) {
      cfg.scheme.dt = dts[l];
      const Integrator integ(cfg, torus);
      const NoisePath path = brownian_bridge_refine(coarse, power_of_two_ratio(dts.front(), dts[l]));
      const PicardResult pr = picard_iterate_mild(integ, y0, path, path.size(), n_iters);
      out.diverged = out.diverged || pr.diverged;
      out.worst_mild_residual = std::max(out.worst_mild_residual, pr.mild_residual);
      if (pr.residuals.size() > 5 && pr.residuals[1] > 0.0)
        out.worst_contraction = std::max(out.worst_contraction, pr.residuals[5] / pr.residuals[1]);
      if (p == 0 && l + 1 == dts.size()) out.residuals = pr.residuals;

      SystemState y = y0;
      double worst = product_norm(pr.fixed_point[0] - as_pair(y), {SpaceLevel::V, alpha});
      for (std::size_t i = 0; i < path.size(); ++i) {
        integ.step(y, path.steps[i], path.dt, i);
        worst = std::max(worst, product_norm(pr.fixed_point[i + 1] - as_pair(y), {SpaceLevel::V, alpha}));
      }
      out.difference[l] += worst * worst;
    }
  }
  for (double& d : out.difference) d = std::sqrt(d / static_cast<double>(paths));
  bool positive = true;
  for (double d : out.difference) positive = positive && d > 0.0;
  out.slope = positive ? loglog_slope(out.dt, out.difference) : std::nan("");
  return out;
}

}  // namespace nspd
