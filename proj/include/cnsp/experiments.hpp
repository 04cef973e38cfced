#pragma once

#include "cnsp/config.hpp"
#include "cnsp/decay.hpp"
#include "cnsp/kernel_probe.hpp"
#include "cnsp/semigroup.hpp"

#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace cnsp {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

// ---- green_verify

struct GreenVerifyResult {
  long samples = 0;
  double max_error = 0.0;      // max entrywise |closed form - oracle|
  double worst_t = 0.0, worst_xi = 0.0;
  double semigroup_error = 0.0;  // max |G(t+s) - G(t)G(s)|
  double trace_error = 0.0;      // relative, generator trace vs lambda+ + lambda- + (d-1)(-mu1|xi|^2)
  double det_error = 0.0;        // relative, generator determinant vs the eigenvalue product
  double xi0 = 0.0;
};

// A quarter of the frequencies are drawn from a 5% band around xi0, the rest
// log-uniformly in [xi_min, xi_max]; t is uniform in [0, t_max].
GreenVerifyResult green_verify(const ModelParams& prm, int dim, long samples, double t_max,
                               double xi_min, double xi_max, std::uint64_t seed,
                               std::ostream* csv = nullptr);

// ---- kernel sweeps

struct KernelSweep {
  double kappa = 1.0;
  Weighting weighting = Weighting::hweighted;
  std::vector<int> js;
  std::vector<std::vector<KernelSample>> profiles;
};

// t = tau 2^{-2j} with tau on t_points equispaced values in [0, tau_max]
KernelSweep kernel_sweep(const ModelParams& prm, int dim, int j_lo, int j_hi, double tau_max,
                         int t_points, const KernelProbeOptions& opt);

void write_kernel_csv_header(std::ostream& os);
void write_kernel_csv(std::ostream& os, const KernelSweep& sw);

// ---- dispersion contrast

struct DispersionTable {
  double kappa = 0.0;
  std::vector<int> js;
  std::vector<double> taus;
  std::vector<std::vector<double>> growth;  // [j][tau], NaN where the box is out of reach
};

DispersionTable dispersion_table(const ModelParams& prm, int dim, int j_lo, int j_hi,
                                 double tau_max, int t_points);

// ---- ETD self-convergence

struct ConvergenceResult {
  std::vector<double> dts;
  std::vector<double> errors;  // against the dt_min/8 reference
  std::vector<double> orders;  // log2 of successive error ratios
  double order = 0.0;          // last entry of orders
};

// Smooth data: a handful of low Fourier modes of amplitude `amplitude`.
CnspState smooth_state(GridPtr g, double amplitude, Form form = Form::velocity);

ConvergenceResult etd_self_convergence(GridPtr g, const Model& model, Scheme scheme,
                                       double amplitude, double dt0, double t_end, int levels = 3,
                                       Form form = Form::velocity);

// ---- experiment runner

// Collects emitted files in one directory and remembers their names.
class ArtifactWriter {
public:
  explicit ArtifactWriter(std::string dir);
  std::ofstream open(const std::string& name);
  void note(const std::string& name);  // for files written by other means
  std::string path(const std::string& name) const;
  const std::string& dir() const { return dir_; }
  const std::vector<std::string>& files() const { return files_; }

private:
  std::string dir_;
  std::vector<std::string> files_;
};

struct ExperimentResult {
  std::vector<Check> checks;
  std::vector<std::string> warnings;
  std::vector<std::pair<std::string, std::string>> fitted;  // r0, empirical constants
  bool aborted = false;
  std::string abort_reason;
  bool all_pass() const;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg, ArtifactWriter& out);

} // namespace cnsp
