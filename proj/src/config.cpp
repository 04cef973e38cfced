#include "cnsp/config.hpp"

#include "cnsp/lpaley.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

namespace cnsp {

namespace {
const std::vector<std::string> names = {"green_verify",   "kernel_bounds",   "dispersion_contrast",
                                        "linear_decay",   "nonlinear_decay", "solver_convergence"};

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}
} // namespace

Experiment parse_experiment(const std::string& s) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (s == names[i]) return (Experiment)i;
  throw std::invalid_argument("unknown experiment '" + s + "'");
}

std::string to_string(Experiment e) { return names[(std::size_t)e]; }

const std::vector<std::string>& experiment_names() { return names; }

ModelParams ExperimentConfig::model_params() const {
  ModelParams p;
  p.mu1_bar = params.mu1;
  p.mu2_bar = params.mu2;
  p.kappa = params.kappa;
  p.gamma = params.gamma;
  return p;
}

Model ExperimentConfig::model() const {
  Model m;
  m.lin = model_params();
  m.pressure_exponent = params.pressure_exponent;
  m.viscosity_exponent = params.viscosity_exponent;
  return m;
}

int ExperimentConfig::resolved_j0() const { return j0 ? *j0 : default_j0(model_params()); }

ConfigError::ConfigError(std::vector<std::string> errs)
    : std::runtime_error([&] {
        std::string s = "invalid configuration:";
        for (const auto& e : errs) s += "\n  " + e;
        return s;
      }()),
      errors(std::move(errs)) {}

double parse_real(const std::string& raw) {
  std::string s = trim(raw);
  double scale = 1.0;
  auto ends_with = [&](const std::string& suf) {
    return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
  };
  if (ends_with("pi")) {
    scale = M_PI;
    s = trim(s.substr(0, s.size() - 2));
    if (!s.empty() && s.back() == '*') s = trim(s.substr(0, s.size() - 1));
    if (s.empty()) return M_PI;
  }
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("expects a real number, got '" + raw + "'");
  }
  if (pos != s.size()) throw std::invalid_argument("expects a real number, got '" + raw + "'");
  return v * scale;
}

namespace {

long parse_int(const std::string& raw) {
  std::string s = trim(raw);
  std::size_t pos = 0;
  long v;
  try {
    v = std::stol(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("expects an integer, got '" + raw + "'");
  }
  if (pos != s.size()) throw std::invalid_argument("expects an integer, got '" + raw + "'");
  return v;
}

bool parse_bool(const std::string& raw) {
  std::string s = trim(raw);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw std::invalid_argument("expects a boolean, got '" + raw + "'");
}

std::vector<double> parse_list(const std::string& raw) {
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(item));
  if (out.empty()) throw std::invalid_argument("expects a comma-separated list of reals");
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> m = {
      {"experiment.name", [](auto& c, auto& v) { c.experiment = parse_experiment(trim(v)); }},
      {"grid.dim", [](auto& c, auto& v) { c.grid.dim = (int)parse_int(v); }},
      {"grid.n", [](auto& c, auto& v) { c.grid.n = (int)parse_int(v); }},
      {"grid.L", [](auto& c, auto& v) { c.grid.L = parse_real(v); }},
      {"params.mu1", [](auto& c, auto& v) { c.params.mu1 = parse_real(v); }},
      {"params.mu2", [](auto& c, auto& v) { c.params.mu2 = parse_real(v); }},
      {"params.kappa", [](auto& c, auto& v) { c.params.kappa = parse_real(v); }},
      {"params.gamma", [](auto& c, auto& v) { c.params.gamma = parse_real(v); }},
      {"params.pressure_exponent", [](auto& c, auto& v) { c.params.pressure_exponent = parse_real(v); }},
      {"params.viscosity_exponent",
       [](auto& c, auto& v) { c.params.viscosity_exponent = parse_real(v); }},
      {"partition.j0", [](auto& c, auto& v) { c.j0 = (int)parse_int(v); }},
      {"profile.sigma1", [](auto& c, auto& v) { c.profile.sigma1 = parse_real(v); }},
      {"profile.p", [](auto& c, auto& v) { c.profile.p = parse_real(v); }},
      {"profile.amplitude", [](auto& c, auto& v) { c.profile.amplitude = parse_real(v); }},
      {"profile.seed",
       [](auto& c, auto& v) {
         long s = parse_int(v);
         if (s < 0) throw std::invalid_argument("expects a non-negative integer");
         c.profile.seed = (std::uint64_t)s;
       }},
      {"profile.flavor", [](auto& c, auto& v) { c.profile.flavor = parse_flavor(trim(v)); }},
      {"profile.anchor", [](auto& c, auto& v) { c.profile.anchor = parse_anchor(trim(v)); }},
      {"stepper.dt", [](auto& c, auto& v) { c.stepper.dt = parse_real(v); }},
      {"stepper.scheme", [](auto& c, auto& v) { c.stepper.scheme = parse_scheme(trim(v)); }},
      {"stepper.t_end", [](auto& c, auto& v) { c.stepper.t_end = parse_real(v); }},
      {"stepper.form", [](auto& c, auto& v) { c.stepper.form = parse_form(trim(v)); }},
      {"stepper.dealias", [](auto& c, auto& v) { c.stepper.dealias = parse_bool(v); }},
      {"stepper.cfl_target", [](auto& c, auto& v) { c.stepper.cfl_target = parse_real(v); }},
      {"stepper.sample_dt", [](auto& c, auto& v) { c.stepper.sample_dt = parse_real(v); }},
      {"output.directory", [](auto& c, auto& v) { c.output.directory = trim(v); }},
      {"output.snapshot_every", [](auto& c, auto& v) { c.output.snapshot_every = parse_int(v); }},
      {"output.csv_streams", [](auto& c, auto& v) { c.output.csv_streams = parse_bool(v); }},
      {"green.samples", [](auto& c, auto& v) { c.green.samples = parse_int(v); }},
      {"green.t_max", [](auto& c, auto& v) { c.green.t_max = parse_real(v); }},
      {"green.xi_min", [](auto& c, auto& v) { c.green.xi_min = parse_real(v); }},
      {"green.xi_max", [](auto& c, auto& v) { c.green.xi_max = parse_real(v); }},
      {"green.tolerance", [](auto& c, auto& v) { c.green.tolerance = parse_real(v); }},
      {"kernel.j_lo", [](auto& c, auto& v) { c.kernel.j_lo = (int)parse_int(v); }},
      {"kernel.tau_max", [](auto& c, auto& v) { c.kernel.tau_max = parse_real(v); }},
      {"kernel.t_points", [](auto& c, auto& v) { c.kernel.t_points = (int)parse_int(v); }},
      {"kernel.oversample", [](auto& c, auto& v) { c.kernel.oversample = parse_real(v); }},
      {"kernel.max_n", [](auto& c, auto& v) { c.kernel.max_n = (int)parse_int(v); }},
      {"kernel.ratio_limit", [](auto& c, auto& v) { c.kernel.ratio_limit = parse_real(v); }},
      {"kernel.contrast", [](auto& c, auto& v) { c.kernel.contrast = parse_bool(v); }},
      {"decay.sigmas", [](auto& c, auto& v) { c.decay.sigmas = parse_list(v); }},
      {"decay.summability", [](auto& c, auto& v) { c.decay.summability = parse_real(v); }},
      {"decay.alpha", [](auto& c, auto& v) { c.decay.alpha = parse_real(v); }},
      {"decay.lyapunov_M", [](auto& c, auto& v) { c.decay.lyapunov_M = parse_real(v); }},
  };
  return m;
}

// "experiment = x" is accepted as shorthand for experiment.name
void apply_line(ExperimentConfig& cfg, const std::string& line, const std::string& where,
                std::vector<std::string>& errors) {
  auto eq = line.find('=');
  if (eq == std::string::npos) {
    errors.push_back(where + ": expected 'section.key = value', got '" + line + "'");
    return;
  }
  std::string key = trim(line.substr(0, eq));
  std::string value = trim(line.substr(eq + 1));
  if (key == "experiment") key = "experiment.name";
  auto it = setters().find(key);
  if (it == setters().end()) {
    errors.push_back(where + ": unknown key '" + key + "'");
    return;
  }
  try {
    it->second(cfg, value);
  } catch (const std::exception& e) {
    errors.push_back(where + ": " + key + " " + e.what());
  }
}

} // namespace

std::vector<std::string> validate(const ExperimentConfig& c) {
  std::vector<std::string> e;
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) e.push_back(msg);
  };
  need(c.grid.dim >= 1 && c.grid.dim <= 3, "grid.dim must be 1, 2 or 3");
  need(c.grid.n >= 8, "grid.n must be at least 8");
  need(is_power_of_two(c.grid.n), "grid.n: n must be a power of two");
  need(c.grid.L > 0.0 && std::isfinite(c.grid.L), "grid.L must be positive");
  need(c.params.mu1 > 0.0, "params.mu1 must be positive");
  need(2.0 * c.params.mu1 + c.params.mu2 > 0.0, "params: 2 mu1 + mu2 must be positive");
  need(std::isfinite(c.params.kappa), "params.kappa must be finite");
  need(c.params.gamma >= 0.0, "params.gamma must be >= 0");
  need(c.params.pressure_exponent > 0.0, "params.pressure_exponent must be positive");
  need(c.profile.p >= 1.0, "profile.p must be >= 1");
  need(c.profile.amplitude >= 0.0, "profile.amplitude must be >= 0");
  if (c.grid.dim >= 1 && c.grid.dim <= 3 && c.profile.p >= 1.0 && c.profile.p < 2.0 * c.grid.dim) {
    try {
      c.profile.validate(c.grid.dim);
    } catch (const std::exception& ex) {
      e.push_back(std::string("profile: ") + ex.what());
    }
  }
  need(c.stepper.dt > 0.0, "stepper.dt must be positive");
  need(c.stepper.t_end >= 0.0, "stepper.t_end must be >= 0");
  need(c.stepper.cfl_target > 0.0, "stepper.cfl_target must be positive");
  need(c.stepper.sample_dt > 0.0, "stepper.sample_dt must be positive");
  if (c.stepper.dt > 0.0 && c.stepper.sample_dt > 0.0) {
    double r = c.stepper.sample_dt / c.stepper.dt;
    need(std::fabs(r - std::round(r)) < 1e-9 && std::round(r) >= 1.0,
         "stepper.sample_dt must be a multiple of stepper.dt");
  }
  need(c.output.snapshot_every >= 0, "output.snapshot_every must be >= 0");
  need(!c.output.directory.empty(), "output.directory must not be empty");
  need(c.green.samples >= 1, "green.samples must be >= 1");
  need(c.green.t_max >= 0.0, "green.t_max must be >= 0");
  need(c.green.xi_min > 0.0 && c.green.xi_max > c.green.xi_min,
       "green: need 0 < xi_min < xi_max");
  need(c.green.tolerance > 0.0, "green.tolerance must be positive");
  need(c.kernel.tau_max > 0.0, "kernel.tau_max must be positive");
  need(c.kernel.t_points >= 2, "kernel.t_points must be >= 2");
  need(c.kernel.oversample >= 2.0, "kernel.oversample must be >= 2");
  need(is_power_of_two(c.kernel.max_n) && c.kernel.max_n >= 64,
       "kernel.max_n must be a power of two >= 64");
  need(c.kernel.ratio_limit > 1.0, "kernel.ratio_limit must exceed 1");
  need(c.decay.summability >= 1.0, "decay.summability must be >= 1");
  need(c.decay.alpha > 0.0, "decay.alpha must be positive");
  need(c.decay.lyapunov_M >= 1.0, "decay.lyapunov_M must be >= 1");
  if (e.empty() && c.j0) {
    auto br = block_range(Grid(c.grid.dim, c.grid.n, c.grid.L));
    if (*c.j0 < br.j_min || *c.j0 > br.j_max) {
      std::ostringstream os;
      os << "partition.j0 = " << *c.j0 << " outside the resolvable blocks [" << br.j_min << ", "
         << br.j_max << "]";
      e.push_back(os.str());
    }
  }
  return e;
}

ExperimentConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
  ExperimentConfig cfg;
  std::vector<std::string> errors;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    apply_line(cfg, line, "line " + std::to_string(lineno), errors);
  }
  for (const auto& o : overrides) apply_line(cfg, trim(o), "--set " + o, errors);
  auto v = validate(cfg);
  errors.insert(errors.end(), v.begin(), v.end());
  if (!errors.empty()) throw ConfigError(errors);
  return cfg;
}

std::vector<std::pair<std::string, std::string>> config_echo(const ExperimentConfig& c) {
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  std::string sig;
  for (std::size_t i = 0; i < c.decay.sigmas.size(); ++i)
    sig += (i ? "," : "") + fmt(c.decay.sigmas[i]);
  return {
      {"experiment.name", to_string(c.experiment)},
      {"grid.dim", std::to_string(c.grid.dim)},
      {"grid.n", std::to_string(c.grid.n)},
      {"grid.L", fmt(c.grid.L)},
      {"params.mu1", fmt(c.params.mu1)},
      {"params.mu2", fmt(c.params.mu2)},
      {"params.kappa", fmt(c.params.kappa)},
      {"params.gamma", fmt(c.params.gamma)},
      {"params.pressure_exponent", fmt(c.params.pressure_exponent)},
      {"params.viscosity_exponent", fmt(c.params.viscosity_exponent)},
      {"partition.j0", std::to_string(c.resolved_j0())},
      {"profile.sigma1", fmt(c.profile.sigma1)},
      {"profile.p", fmt(c.profile.p)},
      {"profile.amplitude", fmt(c.profile.amplitude)},
      {"profile.seed", std::to_string(c.profile.seed)},
      {"profile.flavor", to_string(c.profile.flavor)},
      {"profile.anchor", to_string(c.profile.anchor)},
      {"stepper.dt", fmt(c.stepper.dt)},
      {"stepper.scheme", c.stepper.scheme == Scheme::etd1 ? "etd1" : "etd2rk"},
      {"stepper.t_end", fmt(c.stepper.t_end)},
      {"stepper.form", c.stepper.form == Form::velocity ? "velocity" : "momentum"},
      {"stepper.dealias", b(c.stepper.dealias)},
      {"stepper.cfl_target", fmt(c.stepper.cfl_target)},
      {"stepper.sample_dt", fmt(c.stepper.sample_dt)},
      {"output.directory", c.output.directory},
      {"output.snapshot_every", std::to_string(c.output.snapshot_every)},
      {"output.csv_streams", b(c.output.csv_streams)},
      {"green.samples", std::to_string(c.green.samples)},
      {"green.t_max", fmt(c.green.t_max)},
      {"green.xi_min", fmt(c.green.xi_min)},
      {"green.xi_max", fmt(c.green.xi_max)},
      {"green.tolerance", fmt(c.green.tolerance)},
      {"kernel.j_lo", std::to_string(c.kernel.j_lo)},
      {"kernel.tau_max", fmt(c.kernel.tau_max)},
      {"kernel.t_points", std::to_string(c.kernel.t_points)},
      {"kernel.oversample", fmt(c.kernel.oversample)},
      {"kernel.max_n", std::to_string(c.kernel.max_n)},
      {"kernel.ratio_limit", fmt(c.kernel.ratio_limit)},
      {"kernel.contrast", b(c.kernel.contrast)},
      {"decay.sigmas", sig},
      {"decay.summability", fmt(c.decay.summability)},
      {"decay.alpha", fmt(c.decay.alpha)},
      {"decay.lyapunov_M", fmt(c.decay.lyapunov_M)},
  };
}

} // namespace cnsp
