#include "nspd/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "nspd/error.hpp"

namespace nspd {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + fmt_double(v[i]);
  return out;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  // Accept rationals like 2/3 for the dealias fraction.
  if (auto slash = t.find('/'); slash != std::string::npos) {
    double a = 0, b = 0;
    if (!parse_double(t.substr(0, slash), a) || !parse_double(t.substr(slash + 1), b) || b == 0.0)
      return false;
    out = a / b;
    return true;
  }
  const char* first = t.data();
  const char* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && !t.empty();
}

template <typename Int>
bool parse_int(const std::string& s, Int& out) {
  const std::string t = trim(s);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size() && !t.empty();
}

bool parse_bool(const std::string& s, bool& out) {
  const std::string t = trim(s);
  if (t == "true" || t == "1" || t == "on" || t == "yes") return out = true, true;
  if (t == "false" || t == "0" || t == "off" || t == "no") return out = false, true;
  return false;
}

bool parse_list(const std::string& s, std::vector<double>& out) {
  std::vector<double> v;
  for (const auto& tok : split_ws(s)) {
    double x = 0;
    if (!parse_double(tok, x)) return false;
    v.push_back(x);
  }
  out = std::move(v);
  return true;
}

struct Key {
  std::string name;  // section.key
  std::string comment;
  std::function<std::string(const SolverConfig&)> get;
  std::function<bool(SolverConfig&, const std::string&)> set;
};

template <typename Get>
Key real_key(std::string name, std::string comment, Get ref) {
  return {std::move(name), std::move(comment),
          [ref](const SolverConfig& c) { return fmt_double(ref(const_cast<SolverConfig&>(c))); },
          [ref](SolverConfig& c, const std::string& v) { return parse_double(v, ref(c)); }};
}

template <typename Get>
Key int_key(std::string name, std::string comment, Get ref) {
  return {std::move(name), std::move(comment),
          [ref](const SolverConfig& c) { return std::to_string(ref(const_cast<SolverConfig&>(c))); },
          [ref](SolverConfig& c, const std::string& v) { return parse_int(v, ref(c)); }};
}

template <typename Get>
Key bool_key(std::string name, std::string comment, Get ref) {
  return {std::move(name), std::move(comment),
          [ref](const SolverConfig& c) {
            return std::string(ref(const_cast<SolverConfig&>(c)) ? "true" : "false");
          },
          [ref](SolverConfig& c, const std::string& v) { return parse_bool(v, ref(c)); }};
}

template <typename Get>
Key list_key(std::string name, std::string comment, Get ref) {
  return {std::move(name), std::move(comment),
          [ref](const SolverConfig& c) { return fmt_list(ref(const_cast<SolverConfig&>(c))); },
          [ref](SolverConfig& c, const std::string& v) { return parse_list(v, ref(c)); }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    k.push_back(int_key("grid.dim", "spatial dimension, 2 or 3", [](SolverConfig& c) -> int& { return c.grid.dim; }));
    k.push_back(int_key("grid.n", "points per axis (power of two >= 8)", [](SolverConfig& c) -> int& { return c.grid.n; }));
    k.push_back(real_key("grid.dealias_fraction", "retained fraction of the spectrum per axis; 2/3 rule by default",
                         [](SolverConfig& c) -> double& { return c.grid.dealias_fraction; }));
    k.push_back(real_key("model.alpha", "Sobolev order alpha > dim/2 of the state space", [](SolverConfig& c) -> double& { return c.model.alpha; }));
    k.push_back(real_key("model.lambda", "Ericksen stress coupling (nondimensional)", [](SolverConfig& c) -> double& { return c.model.lambda; }));
    k.push_back(real_key("model.gamma", "director relaxation rate (nondimensional)", [](SolverConfig& c) -> double& { return c.model.gamma; }));
    k.push_back(bool_key("model.convection", "velocity self-advection B(v,v)", [](SolverConfig& c) -> bool& { return c.model.convection; }));
    k.push_back(bool_key("model.stress", "Ericksen stress M(d,d)", [](SolverConfig& c) -> bool& { return c.model.stress; }));
    k.push_back(bool_key("model.director_convection", "director transport v . grad d", [](SolverConfig& c) -> bool& { return c.model.director_convection; }));
    k.push_back(bool_key("model.ginzburg", "harmonic-map term |grad d|^2 d", [](SolverConfig& c) -> bool& { return c.model.ginzburg; }));
    k.push_back(Key{"scheme.variant", "stratonovich_rotation | ito_plus_correction",
                    [](const SolverConfig& c) { return std::string(to_string(c.scheme.variant)); },
                    [](SolverConfig& c, const std::string& v) {
                      const auto t = trim(v);
                      if (t == "stratonovich_rotation") c.scheme.variant = NoiseVariant::stratonovich_rotation;
                      else if (t == "ito_plus_correction") c.scheme.variant = NoiseVariant::ito_plus_correction;
                      else return false;
                      return true;
                    }});
    k.push_back(bool_key("scheme.renormalize_director", "project d back onto the unit sphere after each step",
                         [](SolverConfig& c) -> bool& { return c.scheme.renormalize_director; }));
    k.push_back(real_key("scheme.dt", "time step (nondimensional time)", [](SolverConfig& c) -> double& { return c.scheme.dt; }));
    k.push_back(real_key("scheme.t_max", "horizon (nondimensional time), integer multiple of dt", [](SolverConfig& c) -> double& { return c.scheme.t_max; }));
    k.push_back(int_key("noise.n_modes", "number of divergence-free basis fields driven by W", [](SolverConfig& c) -> std::size_t& { return c.noise.n_modes; }));
    k.push_back(real_key("noise.sigma", "velocity noise amplitude", [](SolverConfig& c) -> double& { return c.noise.sigma; }));
    k.push_back(real_key("noise.decay_s", "spectral decay exponent of Q, must exceed alpha + dim/2", [](SolverConfig& c) -> double& { return c.noise.decay_s; }));
    k.push_back(real_key("noise.multiplicative_gain", "gain of the saturating multiplicative part of Q", [](SolverConfig& c) -> double& { return c.noise.multiplicative_gain; }));
    k.push_back(int_key("noise.seed", "64-bit RNG seed", [](SolverConfig& c) -> std::uint64_t& { return c.noise.seed; }));
    k.push_back(Key{"field.constant", "constant part of h (three components)",
                    [](const SolverConfig& c) {
                      const auto& a = c.field.constant;
                      return fmt_double(a[0]) + " " + fmt_double(a[1]) + " " + fmt_double(a[2]);
                    },
                    [](SolverConfig& c, const std::string& v) {
                      std::vector<double> xs;
                      if (!parse_list(v, xs) || xs.size() != 3) return false;
                      c.field.constant = {xs[0], xs[1], xs[2]};
                      return true;
                    }});
    k.push_back(int_key("field.cross_sign", "+1: G(d) = d x h, -1: G(d) = h x d", [](SolverConfig& c) -> int& { return c.field.cross_sign; }));
    k.push_back(real_key("initial.taylor_green_amplitude", "amplitude of the Taylor-Green velocity",
                         [](SolverConfig& c) -> double& { return c.initial.taylor_green_amplitude; }));
    k.push_back(real_key("initial.director_epsilon", "amplitude of the director perturbation before normalization",
                         [](SolverConfig& c) -> double& { return c.initial.director_epsilon; }));
    k.push_back(list_key("stopping.thresholds", "strictly increasing V_alpha-norm levels", [](SolverConfig& c) -> std::vector<double>& { return c.thresholds; }));
    k.push_back(Key{"output.dir", "output directory",
                    [](const SolverConfig& c) { return c.output.dir; },
                    [](SolverConfig& c, const std::string& v) {
                      c.output.dir = trim(v);
                      return !c.output.dir.empty();
                    }});
    k.push_back(int_key("output.record_stride", "steps between diagnostic rows", [](SolverConfig& c) -> std::size_t& { return c.output.record_stride; }));
    k.push_back(int_key("output.snapshot_stride", "steps between binary snapshots (0 = none)", [](SolverConfig& c) -> std::size_t& { return c.output.snapshot_stride; }));
    k.push_back(list_key("ensemble.amplitudes", "initial-data amplitude multipliers R", [](SolverConfig& c) -> std::vector<double>& { return c.ensemble.amplitudes; }));
    k.push_back(int_key("ensemble.n_traj", "number of trajectories", [](SolverConfig& c) -> std::size_t& { return c.ensemble.n_traj; }));
    k.push_back(list_key("ensemble.survival_times", "time grid of the survival curve (empty = 11 points on [0, t_max])",
                         [](SolverConfig& c) -> std::vector<double>& { return c.ensemble.survival_times; }));
    k.push_back(list_key("convergence.dt_list", "halving sequence of time steps", [](SolverConfig& c) -> std::vector<double>& { return c.convergence.dt_list; }));
    k.push_back(int_key("convergence.reference_refinement", "reference step = smallest dt / this factor (power of two)",
                        [](SolverConfig& c) -> std::size_t& { return c.convergence.reference_refinement; }));
    k.push_back(int_key("convergence.paths", "number of Brownian paths", [](SolverConfig& c) -> std::size_t& { return c.convergence.paths; }));
    k.push_back(real_key("debug.ito_correction_sign", "test hook: -1 mis-signs the Ito correction",
                         [](SolverConfig& c) -> double& { return c.debug.ito_correction_sign; }));
    return k;
  }();
  return table;
}

std::string format_mode(const FieldMode& m, int dim) {
  std::string s = std::to_string(m.component);
  for (int j = 0; j < dim; ++j) s += " " + std::to_string(m.k[j]);
  return s + " " + fmt_double(m.a_cos) + " " + fmt_double(m.a_sin);
}

bool parse_mode(const std::string& v, FieldMode& m, int& dim_out) {
  const auto toks = split_ws(v);
  if (toks.size() != 5 && toks.size() != 6) return false;
  dim_out = static_cast<int>(toks.size()) - 3;
  if (!parse_int(toks[0], m.component)) return false;
  m.k = {0, 0, 0};
  for (int j = 0; j < dim_out; ++j)
    if (!parse_int(toks[1 + j], m.k[j])) return false;
  return parse_double(toks[1 + dim_out], m.a_cos) && parse_double(toks[2 + dim_out], m.a_sin);
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

const char* to_string(NoiseVariant v) {
  return v == NoiseVariant::stratonovich_rotation ? "stratonovich_rotation" : "ito_plus_correction";
}

std::size_t SchemeSpec::steps() const { return static_cast<std::size_t>(std::llround(t_max / dt)); }

bool MagneticFieldSpec::is_zero() const {
  for (double c : constant)
    if (c != 0.0) return false;
  for (const auto& m : modes)
    if (m.a_cos != 0.0 || m.a_sin != 0.0) return false;
  return true;
}

ValidationError::ValidationError(std::vector<Violation> v)
    : std::runtime_error([&] {
        std::string s = "invalid configuration:";
        for (const auto& x : v) s += "\n  " + x.field + ": " + x.constraint + " (got " + x.value + ")";
        return s;
      }()),
      violations_(std::move(v)) {}

std::vector<Violation> check_config(const SolverConfig& c) {
  std::vector<Violation> out;
  auto bad = [&](std::string f, std::string what, std::string val) {
    out.push_back({std::move(f), std::move(what), std::move(val)});
  };
  const int dim = c.grid.dim;
  bool grid_ok = true;
  if (dim != 2 && dim != 3) bad("grid.dim", "must be 2 or 3", std::to_string(dim)), grid_ok = false;
  if (c.grid.n < 8 || (c.grid.n & (c.grid.n - 1)) != 0)
    bad("grid.n", "must be a power of two >= 8", std::to_string(c.grid.n)), grid_ok = false;
  if (!(c.grid.dealias_fraction > 0.0 && c.grid.dealias_fraction <= 1.0))
    bad("grid.dealias_fraction", "must lie in (0, 1]", fmt_double(c.grid.dealias_fraction)), grid_ok = false;

  const double half_dim = dim / 2.0;
  if (!(c.model.alpha > half_dim) || !finite(c.model.alpha))
    bad("model.alpha", "alpha must exceed dim/2 = " + fmt_double(half_dim), fmt_double(c.model.alpha));
  if (!finite(c.model.lambda)) bad("model.lambda", "must be finite", fmt_double(c.model.lambda));
  if (!(c.model.gamma > 0.0) || !finite(c.model.gamma)) bad("model.gamma", "must be > 0", fmt_double(c.model.gamma));

  const auto& s = c.scheme;
  if (!(s.dt > 0.0) || !finite(s.dt)) bad("scheme.dt", "must be > 0", fmt_double(s.dt));
  if (!(s.t_max > 0.0) || !finite(s.t_max)) bad("scheme.t_max", "must be > 0", fmt_double(s.t_max));
  if (s.dt > 0.0 && s.t_max > 0.0) {
    if (s.dt > s.t_max) bad("scheme.dt", "must not exceed t_max", fmt_double(s.dt));
    const double ratio = s.t_max / s.dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
      bad("scheme.t_max", "must be an integer multiple of dt", fmt_double(s.t_max));
  }
  double kc = 0.0;
  if (grid_ok) {
    kc = std::floor(c.grid.dealias_fraction * c.grid.n / 2.0 + 1e-9);
    const double kmax2 = dim * kc * kc;
    if (s.dt > 0.0 && s.dt * kmax2 > 50.0)
      bad("scheme.dt", "dt * |k_max|^2 must be <= 50 (|k_max|^2 = " + fmt_double(kmax2) + ")", fmt_double(s.dt));
  }

  for (std::size_t i = 0; i < c.thresholds.size(); ++i) {
    if (!(c.thresholds[i] > 0.0) || !finite(c.thresholds[i]))
      bad("stopping.thresholds", "must be positive and finite", fmt_list(c.thresholds));
    if (i > 0 && !(c.thresholds[i] > c.thresholds[i - 1]))
      bad("stopping.thresholds", "must be strictly increasing", fmt_list(c.thresholds));
  }

  const auto& nz = c.noise;
  if (!(nz.decay_s > c.model.alpha + half_dim))
    bad("noise.decay_s", "must exceed alpha + dim/2 = " + fmt_double(c.model.alpha + half_dim), fmt_double(nz.decay_s));
  if (!(nz.sigma >= 0.0) || !finite(nz.sigma)) bad("noise.sigma", "must be >= 0", fmt_double(nz.sigma));
  if (!(nz.multiplicative_gain >= 0.0) || !finite(nz.multiplicative_gain))
    bad("noise.multiplicative_gain", "must be >= 0", fmt_double(nz.multiplicative_gain));
  if (grid_ok) {
    const double lattice = std::pow(2.0 * kc + 1.0, dim) - 1.0;
    const double available = lattice * (dim - 1);
    if (static_cast<double>(nz.n_modes) > available)
      bad("noise.n_modes", "must not exceed the " + fmt_double(available) + " retained divergence-free basis fields",
          std::to_string(nz.n_modes));
  }

  if (c.field.cross_sign != 1 && c.field.cross_sign != -1)
    bad("field.cross_sign", "must be +1 or -1", std::to_string(c.field.cross_sign));
  for (double x : c.field.constant)
    if (!finite(x)) bad("field.constant", "must be finite", fmt_double(x));
  for (const auto& m : c.field.modes) {
    if (m.component < 0 || m.component > 2) bad("field.mode", "component must be 0, 1 or 2", std::to_string(m.component));
    if (!finite(m.a_cos) || !finite(m.a_sin)) bad("field.mode", "amplitudes must be finite", format_mode(m, dim));
    for (int j = 0; j < 3; ++j) {
      if (j >= dim && m.k[j] != 0) bad("field.mode", "wavevector has more entries than dim", format_mode(m, 3));
      if (grid_ok && std::abs(m.k[j]) > kc) bad("field.mode", "wavevector outside the retained band", format_mode(m, dim));
    }
  }
  if (!finite(c.initial.taylor_green_amplitude))
    bad("initial.taylor_green_amplitude", "must be finite", fmt_double(c.initial.taylor_green_amplitude));
  if (!finite(c.initial.director_epsilon))
    bad("initial.director_epsilon", "must be finite", fmt_double(c.initial.director_epsilon));

  if (c.output.record_stride < 1) bad("output.record_stride", "must be >= 1", "0");
  if (c.ensemble.amplitudes.empty()) bad("ensemble.amplitudes", "must not be empty", "");
  for (double a : c.ensemble.amplitudes)
    if (!finite(a)) bad("ensemble.amplitudes", "must be finite", fmt_double(a));
  if (c.ensemble.n_traj < 1) bad("ensemble.n_traj", "must be >= 1", "0");

  const auto& cv = c.convergence;
  if (cv.dt_list.size() < 4) bad("convergence.dt_list", "needs at least 4 entries", fmt_list(cv.dt_list));
  for (std::size_t i = 1; i < cv.dt_list.size(); ++i)
    if (std::abs(cv.dt_list[i] * 2.0 - cv.dt_list[i - 1]) > 1e-12 * cv.dt_list[i - 1]) {
      bad("convergence.dt_list", "each entry must be half the previous one", fmt_list(cv.dt_list));
      break;
    }
  const auto rr = cv.reference_refinement;
  if (rr < 1 || (rr & (rr - 1)) != 0)
    bad("convergence.reference_refinement", "must be a power of two", std::to_string(rr));
  if (cv.paths < 1) bad("convergence.paths", "must be >= 1", "0");
  if (c.debug.ito_correction_sign != 1.0 && c.debug.ito_correction_sign != -1.0)
    bad("debug.ito_correction_sign", "must be +1 or -1", fmt_double(c.debug.ito_correction_sign));
  return out;
}

void validate_config(const SolverConfig& cfg) {
  auto v = check_config(cfg);
  if (!v.empty()) throw ValidationError(std::move(v));
}

SolverConfig parse_config(const std::string& text) {
  SolverConfig cfg;
  std::map<std::string, const Key*> by_name;
  for (const auto& k : keys()) by_name[k.name] = &k;

  std::vector<Violation> errors;
  std::set<std::string> seen;
  bool modes_reset = false;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back({"line " + std::to_string(lineno), "malformed section header", line});
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back({"line " + std::to_string(lineno), "expected key = value", line});
      continue;
    }
    const std::string key = (section.empty() ? "" : section + ".") + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "field.mode") {
      if (!modes_reset) cfg.field.modes.clear(), modes_reset = true;
      FieldMode m;
      int mdim = 0;
      if (!parse_mode(value, m, mdim))
        errors.push_back({key, "expected: component k1 k2 [k3] a_cos a_sin", value});
      else
        cfg.field.modes.push_back(m);
      continue;
    }
    if (key == "field.modes" && value == "none") {
      cfg.field.modes.clear();
      modes_reset = true;
      continue;
    }
    auto it = by_name.find(key);
    if (it == by_name.end()) {
      errors.push_back({key, "unknown key", value});
      continue;
    }
    if (!seen.insert(key).second) {
      errors.push_back({key, "duplicate key", value});
      continue;
    }
    if (!it->second->set(cfg, value)) errors.push_back({key, "cannot parse value", value});
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
  validate_config(cfg);
  return cfg;
}

std::string serialize_config(const SolverConfig& cfg, bool with_comments) {
  std::ostringstream out;
  std::string section;
  for (const auto& k : keys()) {
    const auto dot = k.name.find('.');
    const std::string sec = k.name.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out << "\n";
      out << "[" << sec << "]\n";
      section = sec;
      if (sec == "field") {
        if (cfg.field.modes.empty()) {
          out << "modes = none\n";
        }
        for (const auto& m : cfg.field.modes) {
          if (with_comments) out << "# mode = component k1 .. kd a_cos a_sin\n";
          out << "mode = " << format_mode(m, cfg.grid.dim) << "\n";
        }
      }
    }
    if (with_comments) out << "# " << k.comment << "\n";
    out << k.name.substr(dot + 1) << " = " << k.get(cfg) << "\n";
  }
  return out.str();
}

std::string config_hash(const SolverConfig& cfg) {
  std::string text = serialize_config(cfg);
  // Where results are written does not identify the experiment.
  if (auto pos = text.find("[output]"); pos != std::string::npos) {
    auto end = text.find("\n[", pos + 1);
    text.erase(pos, end == std::string::npos ? std::string::npos : end + 1 - pos);
  }
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SolverConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace nspd
