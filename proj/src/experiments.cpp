#include "cnsp/experiments.hpp"

#include "cnsp/lpaley.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

namespace cnsp {

namespace {
std::string num(double v, int prec = 6) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}
} // namespace

// ---------------------------------------------------------------------------

GreenVerifyResult green_verify(const ModelParams& prm, int dim, long samples, double t_max,
                               double xi_min, double xi_max, std::uint64_t seed,
                               std::ostream* csv) {
  prm.validate();
  GreenVerifyResult res;
  res.samples = samples;
  res.xi0 = critical_xi0(prm);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> N(0.0, 1.0);
  if (csv) {
    *csv << "t,xi,error\n";
    csv->precision(10);
  }
  auto direction = [&](double r) {
    std::vector<double> xi(dim);
    double nn = 0.0;
    while (nn < 1e-12) {
      nn = 0.0;
      for (auto& x : xi) {
        x = N(rng);
        nn += x * x;
      }
    }
    for (auto& x : xi) x *= r / std::sqrt(nn);
    return xi;
  };
  const double lmin = std::log10(xi_min), lmax = std::log10(xi_max);
  for (long s = 0; s < samples; ++s) {
    double t = t_max * U(rng);
    double r = s % 4 == 0 ? res.xi0 * (0.95 + 0.1 * U(rng)) : std::pow(10.0, lmin + (lmax - lmin) * U(rng));
    if (s % 400 == 0) r = res.xi0;
    auto xi = direction(r);
    auto G = green_symbol(t, xi, prm);
    auto O = matexp_oracle(t, xi, prm);
    double e = (G.matrix - O).cwiseAbs().maxCoeff();
    if (csv) *csv << t << ',' << r << ',' << e << '\n';
    if (e > res.max_error || std::isnan(e)) {
      res.max_error = std::isnan(e) ? inf : e;
      res.worst_t = t;
      res.worst_xi = r;
    }

    if (s % 10 == 0) {
      double t1 = 5.0 * U(rng), t2 = 5.0 * U(rng);
      auto Gs = green_symbol(t1 + t2, xi, prm).matrix;
      auto G1 = green_symbol(t1, xi, prm).matrix;
      auto G2 = green_symbol(t2, xi, prm).matrix;
      res.semigroup_error = std::max(res.semigroup_error, (Gs - G1 * G2).cwiseAbs().maxCoeff());

      CMat M = generator(xi, prm);
      auto ev = eigenvalues(r, prm);
      cd transverse = -prm.mu1_bar * r * r;
      cd tr = ev.plus + ev.minus + double(dim - 1) * transverse;
      cd det = ev.plus * ev.minus * std::pow(transverse, dim - 1);
      res.trace_error = std::max(res.trace_error, std::abs(M.trace() - tr) / std::max(1.0, std::abs(tr)));
      res.det_error = std::max(res.det_error, std::abs(M.determinant() - det) / std::max(1.0, std::abs(det)));
    }
  }
  return res;
}

// ---------------------------------------------------------------------------

KernelSweep kernel_sweep(const ModelParams& prm, int dim, int j_lo, int j_hi, double tau_max,
                         int t_points, const KernelProbeOptions& opt) {
  if (j_hi < j_lo) throw std::invalid_argument("kernel sweep needs j_lo <= j_hi");
  KernelSweep sw;
  sw.kappa = prm.kappa;
  sw.weighting = opt.weighting;
  for (int j = j_lo; j <= j_hi; ++j) {
    std::vector<double> ts(t_points);
    for (int k = 0; k < t_points; ++k)
      ts[k] = tau_max * k / (t_points - 1) * std::ldexp(1.0, -2 * j);
    sw.js.push_back(j);
    sw.profiles.push_back(kernel_l1_profile(j, ts, dim, prm, opt));
  }
  return sw;
}

void write_kernel_csv_header(std::ostream& os) {
  os << "kappa,weighting,j,t,tau,value,n_aux,oversample,truncated,edge_fraction\n";
}

void write_kernel_csv(std::ostream& os, const KernelSweep& sw) {
  os.precision(10);
  for (const auto& prof : sw.profiles)
    for (const auto& s : prof)
      os << sw.kappa << ',' << to_string(sw.weighting) << ',' << s.j << ',' << s.t << ',' << s.tau
         << ',' << s.value << ',' << s.n_aux << ',' << s.oversample << ',' << (s.truncated ? 1 : 0)
         << ',' << s.edge_fraction << '\n';
}

// ---------------------------------------------------------------------------

DispersionTable dispersion_table(const ModelParams& prm, int dim, int j_lo, int j_hi,
                                 double tau_max, int t_points) {
  DispersionTable tab;
  tab.kappa = prm.kappa;
  for (int k = 0; k < t_points; ++k) tab.taus.push_back(tau_max * k / (t_points - 1));
  for (int j = j_lo; j <= j_hi; ++j) {
    tab.js.push_back(j);
    std::vector<double> row;
    for (double tau : tab.taus) {
      double g = std::numeric_limits<double>::quiet_NaN();
      try {
        g = dispersion_growth(j, tau * std::ldexp(1.0, -2 * j), dim, prm);
      } catch (const std::runtime_error&) {
        // box out of reach: left as NaN
      } catch (const std::domain_error&) {
        // overdamped modes in the block
      }
      row.push_back(g);
    }
    tab.growth.push_back(row);
  }
  return tab;
}

// ---------------------------------------------------------------------------

CnspState smooth_state(GridPtr g, double amplitude, Form form) {
  const int d = g->dim();
  PhysicalField a(g, 1), u(g, d);
  const double k = g->dk();
  for (std::size_t q = 0; q < g->size(); ++q) {
    double x[3] = {0, 0, 0};
    for (int i = 0; i < d; ++i) x[i] = g->x(q, i);
    a.data[q] = amplitude * (std::cos(k * x[0]) + 0.5 * std::sin(k * (x[0] + 2.0 * x[1]) + 0.3));
    for (int i = 0; i < d; ++i)
      u.data[i * g->size() + q] =
          amplitude * (std::sin(k * x[(i + 1) % d] + 0.2 * i) + 0.3 * std::cos(2.0 * k * x[i]));
  }
  CnspState s;
  s.form = Form::velocity;
  s.a = forward(a);
  s.v = forward(u);
  return form == Form::velocity ? s : to_form(s, form);
}

ConvergenceResult etd_self_convergence(GridPtr g, const Model& model, Scheme scheme,
                                       double amplitude, double dt0, double t_end, int levels,
                                       Form form) {
  if (levels < 2) throw std::invalid_argument("self-convergence needs at least two levels");
  auto init = smooth_state(g, amplitude, form);
  auto solve = [&](double dt) {
    StepperConfig sc;
    sc.dt = dt;
    sc.scheme = scheme;
    Stepper st(g, model, sc);
    auto res = run(init, st, t_end, 0, {});
    if (res.aborted) throw NumericalAbort("self-convergence run aborted: " + res.reason);
    return res.state;
  };
  ConvergenceResult cr;
  const double dt_min = dt0 / std::ldexp(1.0, levels - 1);
  auto ref = solve(dt_min / 8.0);
  for (int l = 0; l < levels; ++l) {
    double dt = dt0 / std::ldexp(1.0, l);
    auto s = solve(dt);
    double e2 = 0.0;
    for (std::size_t i = 0; i < s.a.data.size(); ++i) e2 += std::norm(s.a.data[i] - ref.a.data[i]);
    for (std::size_t i = 0; i < s.v.data.size(); ++i) e2 += std::norm(s.v.data[i] - ref.v.data[i]);
    cr.dts.push_back(dt);
    cr.errors.push_back(std::sqrt(e2));
  }
  for (std::size_t l = 1; l < cr.errors.size(); ++l)
    cr.orders.push_back(std::log2(cr.errors[l - 1] / cr.errors[l]));
  cr.order = cr.orders.back();
  return cr;
}

// ---------------------------------------------------------------------------

ArtifactWriter::ArtifactWriter(std::string dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::string ArtifactWriter::path(const std::string& name) const {
  return (std::filesystem::path(dir_) / name).string();
}

std::ofstream ArtifactWriter::open(const std::string& name) {
  std::ofstream os(path(name), std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path(name));
  note(name);
  return os;
}

void ArtifactWriter::note(const std::string& name) {
  if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
}

bool ExperimentResult::all_pass() const {
  return !aborted && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

namespace {

void run_green(const ExperimentConfig& cfg, ArtifactWriter& out, ExperimentResult& res) {
  auto prm = cfg.model_params();
  std::ofstream* csv = nullptr;
  std::ofstream f;
  if (cfg.output.csv_streams) {
    f = out.open("green_verify.csv");
    csv = &f;
  }
  auto r = green_verify(prm, cfg.grid.dim, cfg.green.samples, cfg.green.t_max, cfg.green.xi_min,
                        cfg.green.xi_max, cfg.profile.seed, csv);
  res.fitted.push_back({"xi0", num(r.xi0, 12)});
  res.fitted.push_back({"j0", std::to_string(cfg.resolved_j0())});
  res.checks.push_back({"oracle max error", r.max_error < cfg.green.tolerance,
                        num(r.max_error, 3) + " (tol " + num(cfg.green.tolerance, 3) + ", worst at t=" +
                            num(r.worst_t) + " |xi|=" + num(r.worst_xi) + ")"});
  res.checks.push_back({"semigroup law", r.semigroup_error < 1e-11, num(r.semigroup_error, 3)});
  res.checks.push_back({"trace identity", r.trace_error < 1e-12, num(r.trace_error, 3)});
  res.checks.push_back({"determinant identity", r.det_error < 1e-12, num(r.det_error, 3)});
}

KernelProbeOptions probe_options(const ExperimentConfig& cfg, Weighting w) {
  KernelProbeOptions o;
  o.oversample = cfg.kernel.oversample;
  o.max_n = cfg.kernel.max_n;
  o.allow_truncation = true;
  o.weighting = w;
  return o;
}

void run_kernel(const ExperimentConfig& cfg, ArtifactWriter& out, ExperimentResult& res) {
  auto prm = cfg.model_params();
  const int d = cfg.grid.dim;
  const int j0 = cfg.resolved_j0();
  auto main = kernel_sweep(prm, d, cfg.kernel.j_lo, j0, cfg.kernel.tau_max, cfg.kernel.t_points,
                           probe_options(cfg, Weighting::hweighted));
  auto fit = fit_kernel_bound(main.profiles, cfg.kernel.ratio_limit);
  res.fitted.push_back({"r0", num(fit.r0, 6)});
  res.checks.push_back({"kernel bound j-uniform (kappa=" + num(prm.kappa) + ")",
                        fit.found && fit.ratio < cfg.kernel.ratio_limit,
                        "r0 " + num(fit.r0) + ", sup ratio " + num(fit.ratio)});
  std::ofstream prof;
  if (cfg.output.csv_streams) {
    prof = out.open("kernel_profiles.csv");
    write_kernel_csv_header(prof);
    write_kernel_csv(prof, main);
  }
  auto tab = out.open("kernel_contrast.csv");
  tab << "kappa,weighting,j,weighted_sup\n";
  tab.precision(10);
  for (std::size_t k = 0; k < main.js.size(); ++k)
    tab << prm.kappa << ",hweighted," << main.js[k] << ',' << fit.sups[k] << '\n';
  if (!cfg.kernel.contrast) return;

  ModelParams p0 = prm;
  p0.kappa = 0.0;
  auto con = kernel_sweep(p0, d, cfg.kernel.j_lo, j0, cfg.kernel.tau_max, cfg.kernel.t_points,
                          probe_options(cfg, Weighting::balanced));
  auto sups = weighted_sups(con.profiles, fit.r0);
  double slope = log2_slope(con.js, sups);
  double limit = -(d - 1) / 2.0 + 0.3;
  for (std::size_t k = 0; k < con.js.size(); ++k)
    tab << 0.0 << ",balanced," << con.js[k] << ',' << sups[k] << '\n';
  if (cfg.output.csv_streams) write_kernel_csv(prof, con);
  res.fitted.push_back({"kappa0_log2_slope", num(slope, 6)});
  res.checks.push_back({"kappa=0 sup grows as j decreases", slope <= limit,
                        "log2-slope " + num(slope) + " (need <= " + num(limit) + ")"});
}

void run_dispersion(const ExperimentConfig& cfg, ArtifactWriter& out, ExperimentResult& res) {
  auto prm = cfg.model_params();
  const int d = cfg.grid.dim;
  const int j0 = cfg.resolved_j0();
  ModelParams p0 = prm;
  p0.kappa = 0.0;
  auto t1 = dispersion_table(prm, d, cfg.kernel.j_lo, j0, cfg.kernel.tau_max, cfg.kernel.t_points);
  auto t0 = dispersion_table(p0, d, cfg.kernel.j_lo, j0, cfg.kernel.tau_max, cfg.kernel.t_points);
  auto f = out.open("dispersion.csv");
  f << "kappa,j,tau,growth\n";
  f.precision(10);
  for (const auto* t : {&t1, &t0})
    for (std::size_t a = 0; a < t->js.size(); ++a)
      for (std::size_t b = 0; b < t->taus.size(); ++b)
        f << t->kappa << ',' << t->js[a] << ',' << t->taus[b] << ',' << t->growth[a][b] << '\n';

  // blocks with overdamped modes (no real phase) are dropped in both tables
  std::vector<std::size_t> rows;
  std::vector<int> used_js;
  for (std::size_t a = 0; a < t1.js.size(); ++a) {
    bool real = std::isfinite(t1.growth[a][0]) && std::isfinite(t0.growth[a][0]);
    if (real) {
      rows.push_back(a);
      used_js.push_back(t1.js[a]);
    } else {
      res.warnings.push_back("block j=" + std::to_string(t1.js[a]) +
                             " dropped from the dispersion contrast (overdamped modes)");
    }
  }
  // largest tau at which both tables are complete
  int col = -1;
  for (std::size_t b = 1; b < t1.taus.size() && rows.size() >= 2; ++b) {
    bool ok = true;
    for (auto a : rows) ok = ok && std::isfinite(t1.growth[a][b]) && std::isfinite(t0.growth[a][b]);
    if (ok) col = (int)b;
  }
  if (col < 0) {
    res.checks.push_back({"dispersion contrast", false, "no tau with complete tables"});
    return;
  }
  std::vector<double> g0, g1;
  for (auto a : rows) {
    g0.push_back(t0.growth[a][col]);
    g1.push_back(t1.growth[a][col]);
  }
  double slope = log2_slope(used_js, g0);
  double limit = -(d - 1) / 2.0 + 0.3;
  double spread = *std::max_element(g1.begin(), g1.end()) / *std::min_element(g1.begin(), g1.end());
  res.fitted.push_back({"dispersion_tau", num(t1.taus[col])});
  res.checks.push_back({"kappa=0 dispersion grows as j decreases", slope <= limit,
                        "log2-slope " + num(slope) + " at tau " + num(t1.taus[col]) + " (need <= " +
                            num(limit) + ")"});
  res.checks.push_back({"kappa=" + num(prm.kappa) + " dispersion j-uniform", spread < 1.5,
                        "max/min over j " + num(spread) + " at tau " + num(t1.taus[col])});
}

DecaySetup decay_setup(const ExperimentConfig& cfg, bool nonlinear) {
  DecaySetup s;
  s.dim = cfg.grid.dim;
  s.n = cfg.grid.n;
  s.box_length = cfg.grid.L;
  s.model = cfg.model();
  s.j0 = cfg.resolved_j0();
  s.profile = cfg.profile;
  s.nonlinear = nonlinear;
  s.stepper.dt = cfg.stepper.dt;
  s.stepper.scheme = cfg.stepper.scheme;
  s.stepper.dealias = cfg.stepper.dealias;
  s.stepper.cfl_target = cfg.stepper.cfl_target;
  s.form = cfg.stepper.form;
  s.sample_dt = cfg.stepper.sample_dt;
  s.alpha = cfg.decay.alpha;
  s.t_end = cfg.stepper.t_end;
  s.sigmas = cfg.decay.sigmas;
  s.summability = cfg.decay.summability;
  s.lyapunov_M = cfg.decay.lyapunov_M;
  return s;
}

void write_decay_outputs(const ExperimentConfig& cfg, ArtifactWriter& out, const DecayRun& run,
                         const std::string& tag) {
  {
    auto f = out.open("decay_report" + tag + ".csv");
    write_report_csv_header(f);
    write_report_csv(f, run.besov);
  }
  {
    auto f = out.open("decay_report_lebesgue" + tag + ".csv");
    write_report_csv_header(f);
    write_report_csv(f, run.lebesgue);
  }
  if (!cfg.output.csv_streams) return;
  for (auto [name, series] : {std::pair{"density", &run.density}, std::pair{"momentum", &run.momentum},
                              std::pair{"velocity", &run.velocity}}) {
    auto f = out.open(std::string(name) + "_blocks" + tag + ".csv");
    write_block_csv_header(f);
    write_block_csv(f, *series);
  }
  auto f = out.open("lyapunov" + tag + ".csv");
  f << "t,X1,X2,X3,X4,X5,X,D1,D2,D3,D4,D,mean_a,low_sigma1\n";
  f.precision(12);
  for (std::size_t k = 0; k < run.lyapunov.size(); ++k) {
    const auto& s = run.lyapunov[k];
    f << s.t;
    for (double x : s.X_terms) f << ',' << x;
    f << ',' << s.X;
    for (double x : s.D_terms) f << ',' << x;
    f << ',' << s.D << ',' << run.mass[k] << ',' << run.low_sigma1[k] << '\n';
  }
}

DecayObserver snapshot_observer(const ExperimentConfig& cfg, ArtifactWriter& out,
                                const std::string& tag) {
  if (cfg.output.snapshot_every <= 0) return {};
  auto count = std::make_shared<long>(0);
  const long every = cfg.output.snapshot_every;
  return [count, every, &out, tag](const CnspState& s) {
    long k = (*count)++;
    if (k % every != 0) return;
    std::ostringstream base;
    base << "snapshot" << tag << '_' << std::setw(6) << std::setfill('0') << k;
    write_snapshot(out.path(base.str() + "_a.bin"), s.a);
    write_snapshot(out.path(base.str() + "_v.bin"), s.v);
    out.note(base.str() + "_a.bin");
    out.note(base.str() + "_v.bin");
  };
}

const DecayReport* find_row(const std::vector<DecayReport>& rows, Quantity q, double sigma) {
  for (const auto& r : rows)
    if (r.quantity == q && r.sigma == sigma) return &r;
  return nullptr;
}

void decay_checks(const ExperimentConfig& cfg, const DecayRun& run, ExperimentResult& res) {
  const double kappa = cfg.params.kappa;
  const double tol = cfg.grid.dim == 3 ? 0.15 : 0.1;
  if (run.lebesgue.empty()) {
    res.checks.push_back({"decay fit", false, "no fit: " + run.fit_error});
    return;
  }
  const auto* dn = find_row(run.lebesgue, Quantity::density, 0.0);
  const auto* vl = find_row(run.lebesgue, Quantity::velocity, 0.0);
  res.fitted.push_back({"density_exponent_L" + num(cfg.profile.p), num(dn->fitted)});
  res.fitted.push_back({"velocity_exponent_L" + num(cfg.profile.p), num(vl->fitted)});
  res.fitted.push_back({"gap_L" + num(cfg.profile.p), num(dn->gap)});
  if (kappa > 0.0) {
    if (cfg.profile.p == 2.0) {
      res.checks.push_back({"density L2 exponent", std::fabs(dn->fitted - dn->predicted) <= tol,
                            num(dn->fitted) + " +- " + num(dn->halfwidth) + " vs " + num(dn->predicted)});
      res.checks.push_back({"velocity L2 exponent", std::fabs(vl->fitted - vl->predicted) <= tol,
                            num(vl->fitted) + " +- " + num(vl->halfwidth) + " vs " + num(vl->predicted)});
    }
    res.checks.push_back({"density-velocity gap", std::fabs(dn->gap - 0.5) <= 0.05,
                          num(dn->gap) + " (expected 0.5 +- 0.05)"});
  } else if (kappa == 0.0) {
    res.checks.push_back({"density-velocity gap without coupling", std::fabs(dn->gap) <= 0.1,
                          num(dn->gap) + " (expected 0 +- 0.1)"});
  }
  if (kappa >= 0.0 && !run.low_sigma1.empty()) {
    double mx = *std::max_element(run.low_sigma1.begin(), run.low_sigma1.end());
    res.fitted.push_back({"low_frequency_propagation_ratio", num(mx / run.low_sigma1.front())});
    res.checks.push_back({"low-frequency B^sigma1 propagation", mx <= 2.0 * run.low_sigma1.front(),
                          "running max / initial " + num(mx / run.low_sigma1.front())});
  }
}

void run_decay(const ExperimentConfig& cfg, ArtifactWriter& out, ExperimentResult& res,
               bool nonlinear) {
  if (cfg.params.kappa < 0.0)
    res.warnings.push_back("kappa < 0: the linearized system is unstable (attractive coupling); "
                           "expect exponential growth of the lowest modes");
  auto setup = decay_setup(cfg, false);
  if (!nonlinear) {
    auto run = decay_experiment(setup, snapshot_observer(cfg, out, ""));
    write_decay_outputs(cfg, out, run, "");
    if (run.aborted) {
      res.aborted = true;
      res.abort_reason = run.reason;
      return;
    }
    decay_checks(cfg, run, res);
    return;
  }

  setup.track_lyapunov = false;
  auto lin = decay_experiment(setup);
  write_decay_outputs(cfg, out, lin, "_linear");
  auto nl_setup = decay_setup(cfg, true);
  auto run = decay_experiment(nl_setup, snapshot_observer(cfg, out, ""));
  write_decay_outputs(cfg, out, run, "");
  if (run.aborted) {
    res.aborted = true;
    res.abort_reason = run.reason;
    return;
  }
  decay_checks(cfg, run, res);
  for (auto q : {Quantity::density, Quantity::velocity}) {
    const auto* a = find_row(run.lebesgue, q, 0.0);
    const auto* b = find_row(lin.lebesgue, q, 0.0);
    if (!a || !b) continue;
    res.checks.push_back({to_string(q) + " exponent matches linear run",
                          std::fabs(a->fitted - b->fitted) <= 0.15,
                          num(a->fitted) + " vs linear " + num(b->fitted)});
  }
  double drift = 0.0;
  for (double m : run.mass) drift = std::max(drift, std::fabs(m - run.mass.front()));
  res.checks.push_back({"mass conservation", drift < 1e-12, "max |mean a drift| " + num(drift, 3)});
  if (!run.lyapunov.empty()) {
    double x0 = run.lyapunov.front().X, mx = 0.0;
    for (const auto& s : run.lyapunov) mx = std::max(mx, s.X);
    res.fitted.push_back({"X_ratio", num(mx / x0)});
    res.checks.push_back({"X_p(t) <= 3 X_p(0)", mx <= 3.0 * x0, "max ratio " + num(mx / x0)});
  }
}

void run_convergence(const ExperimentConfig& cfg, ArtifactWriter& out, ExperimentResult& res) {
  auto g = make_grid(cfg.grid.dim, cfg.grid.n, cfg.grid.L);
  double t_end = cfg.stepper.t_end > 0.0 ? cfg.stepper.t_end : 1.0;
  auto cr = etd_self_convergence(g, cfg.model(), cfg.stepper.scheme, cfg.profile.amplitude,
                                 cfg.stepper.dt, t_end, 3, cfg.stepper.form);
  auto f = out.open("convergence.csv");
  f << "dt,error\n";
  f.precision(12);
  for (std::size_t k = 0; k < cr.dts.size(); ++k) f << cr.dts[k] << ',' << cr.errors[k] << '\n';
  double expected = cfg.stepper.scheme == Scheme::etd2rk ? 2.0 : 1.0;
  res.fitted.push_back({"etd_order", num(cr.order)});
  res.checks.push_back({"ETD self-convergence order", std::fabs(cr.order - expected) <= 0.2,
                        num(cr.order) + " (expected " + num(expected) + " +- 0.2)"});
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, ArtifactWriter& out) {
  ExperimentResult res;
  try {
    switch (cfg.experiment) {
    case Experiment::green_verify: run_green(cfg, out, res); break;
    case Experiment::kernel_bounds: run_kernel(cfg, out, res); break;
    case Experiment::dispersion_contrast: run_dispersion(cfg, out, res); break;
    case Experiment::linear_decay: run_decay(cfg, out, res, false); break;
    case Experiment::nonlinear_decay: run_decay(cfg, out, res, true); break;
    case Experiment::solver_convergence: run_convergence(cfg, out, res); break;
    }
  } catch (const NumericalAbort& e) {
    res.aborted = true;
    res.abort_reason = e.what();
  }
  return res;
}

} // namespace cnsp
