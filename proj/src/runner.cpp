#include "nspd/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "nspd/error.hpp"
#include "nspd/io.hpp"
#include "nspd/noise.hpp"
#include "nspd/nonlinear.hpp"
#include "nspd/spectral.hpp"
#include "nspd/studies.hpp"

namespace nspd {

namespace {

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

std::string padded(std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, i);
  return buf;
}

void write_snapshots(const TrajectoryRecord& rec, const std::string& dir) {
  for (const auto& [step, y] : rec.snapshots) {
    write_snapshot(y.v, join(dir, "v_" + padded(step, 8) + ".nspd"));
    write_snapshot(y.d, join(dir, "d_" + padded(step, 8) + ".nspd"));
  }
}

std::vector<double> survival_grid(const SolverConfig& cfg) {
  if (!cfg.ensemble.survival_times.empty()) return cfg.ensemble.survival_times;
  std::vector<double> t;
  for (int i = 0; i <= 10; ++i) t.push_back(cfg.scheme.t_max * i / 10.0);
  return t;
}

int severity(RunStatus s) { return exit_code(s); }

}  // namespace

SolverConfig apply_overrides(SolverConfig cfg, const Overrides& o) {
  if (o.seed) cfg.noise.seed = *o.seed;
  if (o.out) cfg.output.dir = *o.out;
  if (o.snapshots_every) cfg.output.snapshot_stride = *o.snapshots_every;
  if (o.n_traj) cfg.ensemble.n_traj = *o.n_traj;
  return cfg;
}

std::size_t resolve_workers(std::optional<std::size_t> flag) {
  if (flag) return std::max<std::size_t>(1, *flag);
  if (const char* env = std::getenv("NSPD_WORKERS")) {
    char* end = nullptr;
    const unsigned long long n = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<std::size_t>(n);
  }
  return 1;
}

int exit_code(RunStatus s) {
  switch (s) {
    case RunStatus::completed:
      return 0;
    case RunStatus::stopped_at_threshold:
      return 2;
    case RunStatus::numerical_failure:
      return 3;
  }
  return 3;
}

int cmd_simulate(const SolverConfig& cfg, std::ostream& log) {
  const TrajectoryRecord rec = run_trajectory(cfg);
  const std::string& dir = cfg.output.dir;
  try {
    write_text_file(join(dir, "trajectory.csv"), trajectory_csv(rec));
    write_text_file(join(dir, "summary.csv"),
                    summary_csv_header(cfg.thresholds.size()) + summary_csv_row(rec, 1.0));
    write_text_file(join(dir, "config.ini"), serialize_config(cfg, true));
    write_snapshots(rec, join(dir, "snapshots"));
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
  const RecordRow& last = rec.rows.back();
  log << "status " << to_string(rec.status) << " steps " << rec.steps_taken << " t " << format_double(last.t)
      << " |v|_V " << format_double(last.v_norm) << " max_constraint_dev " << format_double(rec.max_constraint_dev)
      << " max_divergence_ratio " << format_double(rec.max_divergence_ratio) << '\n';
  return exit_code(rec.status);
}

EnsembleResult run_ensemble(const SolverConfig& cfg, std::size_t workers) {
  validate_config(cfg);
  const std::size_t n = cfg.ensemble.n_traj;
  EnsembleResult res;
  res.records.resize(n);
  res.amplitudes.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.amplitudes[i] = cfg.ensemble.amplitudes[i % cfg.ensemble.amplitudes.size()];

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        SolverConfig c = cfg;
        c.initial.taylor_green_amplitude *= res.amplitudes[i];
        c.initial.director_epsilon *= res.amplitudes[i];
        RunOptions opt;
        opt.trajectory = i;
        res.records[i] = run_trajectory(c, opt);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t w = std::clamp<std::size_t>(workers, 1, n);
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < w; ++k) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<LifespanSample> samples;
  for (std::size_t i = 0; i < n; ++i) {
    LifespanSample s = blowup_monitor(res.records[i]);
    s.amplitude = res.amplitudes[i];
    samples.push_back(std::move(s));
  }
  const std::vector<double> grid = survival_grid(cfg);
  SurvivalCurve pooled = lifespan_statistics(samples, grid);
  pooled.amplitude = std::nan("");
  res.curves.push_back(std::move(pooled));
  for (SurvivalCurve& c : lifespan_by_amplitude(samples, grid)) res.curves.push_back(std::move(c));
  return res;
}

int cmd_ensemble(const SolverConfig& cfg, std::size_t workers, std::ostream& log) {
  const EnsembleResult res = run_ensemble(cfg, workers);
  const std::string& dir = cfg.output.dir;
  int code = 0;
  try {
    std::string summary = summary_csv_header(cfg.thresholds.size());
    for (std::size_t i = 0; i < res.records.size(); ++i) {
      const TrajectoryRecord& rec = res.records[i];
      write_text_file(join(dir, "traj_" + padded(i, 6) + ".csv"), trajectory_csv(rec));
      write_snapshots(rec, join(dir, "snapshots/traj_" + padded(i, 6)));
      summary += summary_csv_row(rec, res.amplitudes[i]);
      code = std::max(code, severity(rec.status));
    }
    write_text_file(join(dir, "ensemble_summary.csv"), summary);
    write_text_file(join(dir, "survival.csv"), survival_csv(res.curves));
    write_text_file(join(dir, "config.ini"), serialize_config(cfg, true));
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& r : res.records) ++counts[to_string(r.status)];
  log << "trajectories " << res.records.size();
  for (const auto& [k, v] : counts) log << ' ' << k << ' ' << v;
  log << '\n';
  return code;
}

int cmd_convergence(const SolverConfig& cfg, std::ostream& log) {
  const ConvergenceReport rep = convergence_study(cfg);
  const std::string& dir = cfg.output.dir;
  try {
    write_text_file(join(dir, "convergence.csv"), convergence_csv(rep));
    write_text_file(join(dir, "convergence_slopes.csv"),
                    "quantity,slope[1],reference_dt[1],paths\nstrong_error," + format_double(rep.strong_slope) + ',' +
                        format_double(rep.reference_dt) + ',' + std::to_string(rep.paths) + "\nconstraint_drift," +
                        format_double(rep.drift_slope) + ',' + format_double(rep.reference_dt) + ',' +
                        std::to_string(rep.paths) + '\n');
    write_text_file(join(dir, "config.ini"), serialize_config(cfg, true));
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
  for (std::size_t i = 0; i < rep.dt.size(); ++i)
    log << "dt " << format_double(rep.dt[i]) << " strong_error " << format_double(rep.strong_error[i])
        << " constraint_drift " << format_double(rep.constraint_drift[i]) << '\n';
  log << "strong_slope " << format_double(rep.strong_slope) << " drift_slope " << format_double(rep.drift_slope)
      << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// check battery

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

using Suite = SuiteResult (*)(const SolverConfig&);

SuiteResult suite_spectral(const SolverConfig& cfg) {
  const auto torus = Torus::create(cfg.grid);
  const int dim = torus->dim();
  const int band = std::max(1, cfg.grid.n / 8);
  const SpectralField u = random_field(torus, dim, band, 1.0, stream_key(cfg.noise.seed, 0x5eu));
  const SpectralField p = leray_project(u);
  const double idem = l2_norm(leray_project(p) - p) / l2_norm(p);
  const double div = divergence_ratio(p);
  const double round = l2_norm(torus->to_spectral(torus->to_physical(u)) - u) / l2_norm(u);
  // sin(x1) has |.|_{H^r}^2 = (2 pi)^d 2^r / 2
  SpectralField s = torus->zeros(1);
  s.add_conjugate_pair(0, {1, 0, 0}, Complex(0.0, -0.5));
  const double r = cfg.model.alpha;
  const double exact = std::sqrt(torus->volume() * std::pow(2.0, r) / 2.0);
  const double norm_err = std::abs(sobolev_norm(s, r) - exact) / exact;
  const double worst = std::max({idem, div, round, norm_err});
  return {"spectral", worst <= 1e-13,
          "projection_idempotence " + fmt(idem) + " divergence " + fmt(div) + " transform_round_trip " +
              fmt(round) + " sobolev_mode " + fmt(norm_err)};
}

SolverConfig short_run(const SolverConfig& cfg) {
  SolverConfig c = cfg;
  c.scheme.t_max = std::min(cfg.scheme.t_max, 200.0 * cfg.scheme.dt);
  c.scheme.t_max = cfg.scheme.dt * std::round(c.scheme.t_max / cfg.scheme.dt);
  c.output.snapshot_stride = 0;
  return c;
}

bool tau_monotone(const std::vector<double>& tau) {
  for (std::size_t m = 1; m < tau.size(); ++m) {
    if (std::isnan(tau[m])) continue;
    if (std::isnan(tau[m - 1]) || tau[m] < tau[m - 1]) return false;
  }
  return true;
}

SuiteResult suite_incompressibility(const SolverConfig& cfg) {
  bool pass = true;
  double worst = 0.0;
  for (NoiseVariant v : {NoiseVariant::stratonovich_rotation, NoiseVariant::ito_plus_correction}) {
    SolverConfig c = short_run(cfg);
    c.scheme.variant = v;
    const TrajectoryRecord rec = run_trajectory(c);
    worst = std::max(worst, rec.max_divergence_ratio);
    pass = pass && rec.status != RunStatus::numerical_failure && tau_monotone(rec.tau);
  }
  pass = pass && worst <= 1e-12;
  return {"incompressibility", pass, "max_divergence_ratio " + fmt(worst)};
}

SuiteResult suite_sphere(const SolverConfig& cfg) {
  SolverConfig c = short_run(cfg);
  c.scheme.renormalize_director = true;
  const TrajectoryRecord rec = run_trajectory(c);
  const bool pass = rec.status != RunStatus::numerical_failure && rec.max_constraint_dev <= 1e-12;
  return {"sphere_constraint_renormalized", pass, "max_constraint_dev " + fmt(rec.max_constraint_dev)};
}

SuiteResult suite_point_identities(const SolverConfig& cfg) {
  NormalStream z(stream_key(cfg.noise.seed, 0x150u));
  double iso = 0.0, ident = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const Vec3 d{z(), z(), z()};
    const Vec3 h{z(), z(), z()};
    const double de = z();
    const Vec3 r = rotate_point(d, h, de);
    const double nd = std::sqrt(dot(d, d));
    iso = std::max(iso, std::abs(std::sqrt(dot(r, r)) - nd) / nd);
    const Vec3 axb = cross(d, h);
    const double lhs = -dot(axb, axb);
    const double rhs = dot(d, cross(axb, h));
    ident = std::max(ident, std::abs(lhs - rhs) / (dot(d, d) * dot(h, h)));
  }
  return {"pointwise_identities", iso <= 1e-14 && ident <= 1e-14,
          "rotation_norm_defect " + fmt(iso) + " cross_identity " + fmt(ident)};
}

SuiteResult suite_vector_identities(const SolverConfig& cfg) {
  const auto torus = Torus::create(cfg.grid);
  const int band = std::max(1, cfg.grid.n / 8);
  const SpectralField d = random_field(torus, 3, band, 2.0, stream_key(cfg.noise.seed, 0x1d3u));
  const IdentityResiduals r = vector_identity_checks(d);
  const double scale = std::pow(linf_norm(d), 2) * (1.0 + cfg.grid.n * cfg.grid.n);
  const bool pass = r.gradient <= 1e-12 * scale && r.laplacian <= 1e-12 * scale;
  return {"vector_identities", pass, "gradient " + fmt(r.gradient) + " laplacian " + fmt(r.laplacian)};
}

SuiteResult suite_noise_basis(const SolverConfig& cfg) {
  const auto torus = Torus::create(cfg.grid);
  const NoiseBasis basis(torus, cfg.noise, cfg.model.alpha);
  double div = 0.0, orth = 0.0;
  std::vector<SpectralField> fields;
  for (std::size_t j = 0; j < basis.size(); ++j) fields.push_back(basis.basis_field(j));
  for (std::size_t i = 0; i < fields.size(); ++i) {
    div = std::max(div, divergence_ratio(fields[i]));
    for (std::size_t j = 0; j <= i; ++j)
      orth = std::max(orth, std::abs(l2_inner(fields[i], fields[j]) - (i == j ? 1.0 : 0.0)));
  }
  return {"noise_basis", div <= 1e-14 && orth <= 1e-12,
          "modes " + std::to_string(basis.size()) + " divergence " + fmt(div) + " orthonormality " + fmt(orth) +
              " ell0 " + fmt(basis.ell0()) + " lipschitz " + fmt(basis.lipschitz())};
}

SuiteResult suite_weak_consistency(const SolverConfig& cfg) {
  const WeakConsistency w =
      weak_consistency_study(10000, {2, 4, 8, 16}, 1.0, cfg.noise.seed, cfg.debug.ito_correction_sign);
  std::string detail = "slope " + fmt(w.slope) + " differences";
  for (double d : w.difference) detail += ' ' + fmt(d);
  return {"ito_stratonovich_weak_consistency", std::isfinite(w.slope) && w.slope >= 0.9, detail};
}

SuiteResult suite_ratios(const SolverConfig& cfg) {
  const RatioSuite a = lemma_ratio_suite(100, cfg.model.alpha, cfg.noise.seed, cfg.grid);
  const RatioSuite b = lemma_ratio_suite(100, cfg.model.alpha, cfg.noise.seed + 1, cfg.grid);
  const std::pair<const char*, double RatioSuite::*> entries[] = {
      {"C_convective", &RatioSuite::est_convective}, {"C_director", &RatioSuite::est_director},
      {"C_stress", &RatioSuite::est_stress},         {"C_ginzburg", &RatioSuite::est_ginzburg},
      {"c0_product", &RatioSuite::est_product},      {"M_semigroup", &RatioSuite::est_semigroup},
      {"C_drift", &RatioSuite::est_drift}};
  bool pass = a.all_finite() && b.all_finite();
  std::string detail;
  for (const auto& [name, field] : entries) {
    const double x = a.*field, y = b.*field;
    const double spread = std::max(x, y) / std::min(x, y);
    pass = pass && x > 0.0 && y > 0.0 && spread <= 3.0;
    detail += std::string(detail.empty() ? "" : " ") + name + ' ' + fmt(std::max(x, y)) + " (spread " +
              fmt(spread) + ")";
  }
  return {"estimate_ratios", pass, detail};
}

SuiteResult suite_homogeneity(const SolverConfig& cfg) {
  const auto torus = Torus::create(cfg.grid);
  const int dim = torus->dim();
  const int band = std::max(1, cfg.grid.n / 8);
  const double a = cfg.model.alpha;
  const std::uint64_t s = cfg.noise.seed;
  const SpectralField u = random_field(torus, dim, band, 2.0, stream_key(s, 0x40u), true);
  const SpectralField v = random_field(torus, dim, band, 2.0, stream_key(s, 0x41u), true);
  const SpectralField d = random_field(torus, 3, band, 2.0, stream_key(s, 0x42u));
  const SpectralField m = random_field(torus, 3, band, 2.0, stream_key(s, 0x43u));
  const SpectralField f = random_field(torus, 1, band, 2.0, stream_key(s, 0x44u));
  const SpectralField g = random_field(torus, 1, band, 2.0, stream_key(s, 0x45u));
  double worst = 0.0;
  auto cmp = [&](double r0, double r1) { worst = std::max(worst, std::abs(r1 - r0) / std::abs(r0)); };
  for (double c : {0.25, 3.0, 17.0}) {
    cmp(ratio_convective(u, v, a), ratio_convective(c * u, v, a));
    cmp(ratio_convective(u, v, a), ratio_convective(u, c * v, a));
    cmp(ratio_director(u, d, a), ratio_director(c * u, c * d, a));
    cmp(ratio_stress(d, m, a), ratio_stress(c * d, m, a));
    cmp(ratio_ginzburg(d, m, a), ratio_ginzburg(c * d, c * m, a));
    cmp(ratio_product(f, g, a), ratio_product(c * f, c * g, a));
  }
  return {"estimate_homogeneity", worst <= 1e-12, "max_relative_change " + fmt(worst)};
}

SuiteResult suite_psi(const SolverConfig& cfg) {
  const auto torus = Torus::create(cfg.grid);
  const int band = std::max(1, cfg.grid.n / 8);
  SpectralField d = random_field(torus, 3, band, 2.0, stream_key(cfg.noise.seed, 0x9e1u));
  d *= 1.0 / linf_norm(d) * 1.3;  // |d|^2 - 1 changes sign
  const ConstraintReport rep = constraint_report(d);
  const double p4 = psi_ell(d, 1e4);
  bool monotone = true;
  double prev = 0.0;
  for (double ell : {1e4, 3e4, 1e5, 1e6}) {
    const double p = psi_ell(d, ell);
    monotone = monotone && p >= prev;
    prev = p;
  }
  const double err = std::abs(p4 - rep.y_minus);
  return {"psi_limit", err <= 1e-6 && monotone && rep.y_minus > 0.0 && rep.z_plus > 0.0,
          "psi_1e4 " + fmt(p4) + " y_minus " + fmt(rep.y_minus) + " error " + fmt(err)};
}

SuiteResult suite_stopping(const SolverConfig&) {
  std::vector<double> t, norm;
  for (int i = 0; i < 64; ++i) {
    t.push_back(i / 64.0);
    norm.push_back(1.0 / (1.0 - i / 64.0));
  }
  const LifespanSample s = blowup_monitor(t, norm, {2.0, 4.0, 8.0}, 1.0);
  const bool exact = s.tau.size() == 3 && s.tau[0] == 0.5 && s.tau[1] == 0.75 && s.tau[2] == 0.875;
  return {"stopping_times", exact && s.status == LifespanStatus::stopped && tau_monotone(s.tau),
          "tau " + fmt(s.tau.size() > 0 ? s.tau[0] : NAN) + ' ' + fmt(s.tau.size() > 1 ? s.tau[1] : NAN) + ' ' +
              fmt(s.tau.size() > 2 ? s.tau[2] : NAN)};
}

}  // namespace

std::vector<SuiteResult> run_checks(const SolverConfig& cfg) {
  validate_config(cfg);
  const std::pair<const char*, Suite> suites[] = {
      {"spectral", suite_spectral},
      {"incompressibility", suite_incompressibility},
      {"sphere_constraint_renormalized", suite_sphere},
      {"pointwise_identities", suite_point_identities},
      {"vector_identities", suite_vector_identities},
      {"noise_basis", suite_noise_basis},
      {"ito_stratonovich_weak_consistency", suite_weak_consistency},
      {"estimate_ratios", suite_ratios},
      {"estimate_homogeneity", suite_homogeneity},
      {"psi_limit", suite_psi},
      {"stopping_times", suite_stopping},
  };
  std::vector<SuiteResult> out;
  for (const auto& [name, fn] : suites) {
    try {
      out.push_back(fn(cfg));
    } catch (const std::exception& e) {
      out.push_back({name, false, std::string("exception: ") + e.what()});
    }
  }
  return out;
}

int cmd_check(const SolverConfig& cfg, std::ostream& log) {
  bool ok = true;
  for (const SuiteResult& r : run_checks(cfg)) {
    log << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    ok = ok && r.pass;
  }
  return ok ? 0 : 4;
}

}  // namespace nspd
