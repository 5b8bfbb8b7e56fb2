#include "nspd/integrators.hpp"

#include <cmath>
#include <limits>

#include "nspd/diagnostics.hpp"
#include "nspd/error.hpp"
#include "nspd/spectral.hpp"

namespace nspd {

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::completed: return "completed";
    case RunStatus::stopped_at_threshold: return "stopped_at_threshold";
    case RunStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

SpectralField director_semigroup(const SpectralField& d, double t, double gamma) {
  return semigroup_apply(d, gamma * t, Semigroup::heat);
}

Integrator::Integrator(const SolverConfig& cfg, std::shared_ptr<const Torus> torus)
    : cfg_(cfg), torus_(std::move(torus)) {
  if (!torus_ || !(torus_->grid() == cfg.grid)) throw ConfigError("integrator: grid does not match config");
  h_ = make_magnetic_field(torus_, cfg.field);
  basis_ = std::make_unique<NoiseBasis>(torus_, cfg.noise, cfg.model.alpha);
  decay_v_.resize(torus_->modes());
  decay_d_.resize(torus_->modes());
  for (std::size_t m = 0; m < torus_->modes(); ++m) {
    decay_v_[m] = std::exp(-torus_->k_squared(m) * cfg.scheme.dt);
    decay_d_[m] = std::exp(-cfg.model.gamma * torus_->k_squared(m) * cfg.scheme.dt);
  }
}

namespace {

void scale_modes(SpectralField& f, const std::vector<double>& decay) {
  for (int c = 0; c < f.components(); ++c) {
    auto x = f.component(c);
    for (std::size_t m = 0; m < x.size(); ++m) x[m] *= decay[m];
  }
}

}  // namespace

Integrator::Integrator(const SolverConfig& cfg) : Integrator(cfg, Torus::create(cfg.grid)) {}

SpectralField Integrator::step_velocity(const SystemState& y, const SpectralField& drift_v,
                                        const NoiseIncrement& inc, double dt) const {
  SpectralField w = y.v;
  w.axpy(dt, drift_v);
  if (cfg_.noise.sigma != 0.0 && basis_->size() > 0) w += basis_->apply(y.v, inc.dW);
  if (dt != cfg_.scheme.dt) return semigroup_apply(w, dt, Semigroup::stokes);
  w = leray_project(w);
  scale_modes(w, decay_v_);
  return w;
}

SpectralField Integrator::step_director_deterministic(const SystemState& y, const SpectralField& drift_d,
                                                      double dt) const {
  SpectralField w = y.d;
  w.axpy(dt, drift_d);
  if (dt != cfg_.scheme.dt) return director_semigroup(w, dt, cfg_.model.gamma);
  scale_modes(w, decay_d_);
  return w;
}

SpectralField Integrator::step_director_deterministic(const SystemState& y, double dt) const {
  return step_director_deterministic(y, drift(y).d, dt);
}

SpectralField Integrator::step_director_noise_rotation(const SpectralField& d, double dEta) const {
  if (dEta == 0.0 || h_.is_zero()) return d;
  PhysicalField p = torus_->to_physical(d);
  const PhysicalField& h = h_.samples;
  for (std::size_t i = 0; i < p.points; ++i) {
    const Vec3 r = rotate_point({p.at(0, i), p.at(1, i), p.at(2, i)}, {h.at(0, i), h.at(1, i), h.at(2, i)}, dEta,
                                h_.cross_sign);
    for (int k = 0; k < 3; ++k) p.at(k, i) = r[k];
  }
  return torus_->to_spectral(p);
}

SpectralField Integrator::step_director_noise_ito(const SpectralField& d, double dEta, double dt) const {
  if (h_.is_zero()) return d;
  PhysicalField p = torus_->to_physical(d);
  const PhysicalField& h = h_.samples;
  for (std::size_t i = 0; i < p.points; ++i) {
    const Vec3 r = ito_point({p.at(0, i), p.at(1, i), p.at(2, i)}, {h.at(0, i), h.at(1, i), h.at(2, i)}, dEta, dt,
                             h_.cross_sign, cfg_.debug.ito_correction_sign);
    for (int k = 0; k < 3; ++k) p.at(k, i) = r[k];
  }
  return torus_->to_spectral(p);
}

SpectralField Integrator::renormalize(const SpectralField& d) const {
  PhysicalField p = torus_->to_physical(d);
  for (std::size_t i = 0; i < p.points; ++i) {
    const double r = std::sqrt(p.at(0, i) * p.at(0, i) + p.at(1, i) * p.at(1, i) + p.at(2, i) * p.at(2, i));
    if (r == 0.0) continue;
    for (int k = 0; k < 3; ++k) p.at(k, i) /= r;
  }
  return torus_->to_spectral(p);
}

void Integrator::step(SystemState& y, const NoiseIncrement& inc, double dt, std::size_t step_index) const {
  const FieldPair f = drift(y);
  SpectralField v = step_velocity(y, f.v, inc, dt);
  SpectralField d = step_director_deterministic(y, f.d, dt);
  if (cfg_.scheme.variant == NoiseVariant::stratonovich_rotation)
    d = step_director_noise_rotation(d, inc.dEta);
  else
    d = step_director_noise_ito(d, inc.dEta, dt);
  if (cfg_.scheme.renormalize_director) d = renormalize(d);
  if (!v.all_finite() || !d.all_finite()) throw NumericalFailure("non-finite field", step_index);
  y.v = std::move(v);
  y.d = std::move(d);
  y.time += dt;
}

RecordRow diagnose(const SystemState& y, double alpha) {
  RecordRow r;
  r.t = y.time;
  r.v_norm = product_norm(y, {SpaceLevel::V, alpha});
  r.e_norm = product_norm(y, {SpaceLevel::E, alpha});
  const ConstraintReport c = constraint_report(y.d, y.time);
  r.max_constraint_dev = c.max_pointwise_dev;
  r.y_minus = c.y_minus;
  r.z_plus = c.z_plus;
  const double l2 = l2_norm(y.v);
  r.energy = l2 * l2;
  r.divergence = divergence_ratio(y.v);
  r.grad_d_linf = linf_norm(gradient(y.d));
  return r;
}

TrajectoryRecord run_trajectory(const SolverConfig& cfg, const RunOptions& opt) {
  SystemState last;
  return run_trajectory(cfg, opt, last);
}

TrajectoryRecord run_trajectory(const SolverConfig& cfg, const RunOptions& opt, SystemState& final_state) {
  validate_config(cfg);
  const auto torus = Torus::create(cfg.grid);
  const Integrator integ(cfg, torus);
  const double dt = cfg.scheme.dt;
  const double alpha = cfg.model.alpha;

  std::size_t n_steps = cfg.scheme.steps();
  if (opt.t_end) {
    const double r = *opt.t_end / dt;
    n_steps = static_cast<std::size_t>(std::llround(r));
    if (std::abs(r - static_cast<double>(n_steps)) > 1e-9 * std::max(1.0, r))
      throw ConfigError("run_trajectory: t_end is not a multiple of dt");
  }
  if (opt.path) {
    if (std::abs(opt.path->dt - dt) > 1e-12 * dt) throw ConfigError("run_trajectory: noise path dt differs");
    if (opt.path->size() < n_steps) throw ConfigError("run_trajectory: noise path too short");
    if (opt.path->n_modes != cfg.noise.n_modes) throw ConfigError("run_trajectory: noise path mode count differs");
  }

  SystemState y = opt.initial ? *opt.initial : make_initial_state(torus, cfg.initial);
  y.time = 0.0;

  TrajectoryRecord rec;
  rec.config_hash = config_hash(cfg);
  rec.trajectory = opt.trajectory;
  rec.tau.assign(cfg.thresholds.size(), std::numeric_limits<double>::quiet_NaN());
  const double top = cfg.thresholds.empty() ? std::numeric_limits<double>::infinity() : cfg.thresholds.back();

  auto mark = [&](double norm, double t) {
    for (std::size_t m = 0; m < cfg.thresholds.size(); ++m)
      if (std::isnan(rec.tau[m]) && norm >= cfg.thresholds[m]) rec.tau[m] = t;
  };
  auto watch = [&](const SystemState& s) {
    rec.max_divergence_ratio = std::max(rec.max_divergence_ratio, divergence_ratio(s.v));
    rec.max_constraint_dev = std::max(rec.max_constraint_dev, constraint_report(s.d, s.time).max_pointwise_dev);
  };
  const std::size_t stride = std::max<std::size_t>(1, cfg.output.record_stride);
  const std::size_t snap = cfg.output.snapshot_stride;

  RecordRow row0 = diagnose(y, alpha);
  rec.rows.push_back(row0);
  watch(y);
  if (snap > 0) rec.snapshots.emplace_back(0, y);
  mark(row0.v_norm, 0.0);
  if (row0.v_norm >= top) {
    rec.status = RunStatus::stopped_at_threshold;
    final_state = y;
    return rec;
  }

  for (std::size_t i = 0; i < n_steps; ++i) {
    const NoiseIncrement inc =
        opt.path ? opt.path->steps[i] : sample_increment(i, dt, cfg.noise, opt.trajectory);
    const double t_next = static_cast<double>(i + 1) * dt;
    try {
      integ.step(y, inc, dt, i);
    } catch (const NumericalFailure& e) {
      rec.status = RunStatus::numerical_failure;
      rec.failure_step = e.step();
      for (double& t : rec.tau)
        if (std::isnan(t)) t = t_next;
      break;
    }
    y.time = t_next;  // avoid accumulated rounding in the clock
    rec.steps_taken = i + 1;
    const double vn = product_norm(y, {SpaceLevel::V, alpha});
    if (!std::isfinite(vn)) {
      rec.status = RunStatus::numerical_failure;
      rec.failure_step = i;
      for (double& t : rec.tau)
        if (std::isnan(t)) t = t_next;
      break;
    }
    watch(y);
    mark(vn, t_next);
    const bool stop = vn >= top;
    if ((i + 1) % stride == 0 || i + 1 == n_steps || stop) rec.rows.push_back(diagnose(y, alpha));
    if (snap > 0 && ((i + 1) % snap == 0)) rec.snapshots.emplace_back(i + 1, y);
    if (stop) {
      rec.status = RunStatus::stopped_at_threshold;
      break;
    }
  }
  final_state = y;
  return rec;
}

}  // namespace nspd
