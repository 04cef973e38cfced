#pragma once

#include "cnsp/decay.hpp"
#include "cnsp/semigroup.hpp"
#include "cnsp/solver.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cnsp {

enum class Experiment {
  green_verify,
  kernel_bounds,
  dispersion_contrast,
  linear_decay,
  nonlinear_decay,
  solver_convergence
};

Experiment parse_experiment(const std::string& s);
std::string to_string(Experiment e);
const std::vector<std::string>& experiment_names();

struct GridBlock {
  int dim = 2;
  int n = 128;
  double L = 64.0 * M_PI;
};

struct ParamsBlock {
  double mu1 = 1.0;
  double mu2 = 0.0;
  double kappa = 1.0;
  double gamma = 1.0;
  double pressure_exponent = 1.0;
  double viscosity_exponent = 0.0;
};

struct StepperBlock {
  double dt = 0.25;
  Scheme scheme = Scheme::etd2rk;
  double t_end = 0.0;  // 0: box-validity horizon (decay) or experiment default
  Form form = Form::momentum;
  bool dealias = true;
  double cfl_target = 0.5;
  double sample_dt = 0.25;
};

struct OutputBlock {
  std::string directory = "out";
  long snapshot_every = 0;  // in samples; 0 disables snapshots
  bool csv_streams = true;
};

struct GreenBlock {
  long samples = 10000;
  double t_max = 10.0;
  double xi_min = 1e-3;
  double xi_max = 1e3;
  double tolerance = 1e-9;
};

struct KernelBlock {
  int j_lo = -7;
  double tau_max = 16.0;
  int t_points = 9;
  double oversample = 4.0;
  int max_n = 2048;
  double ratio_limit = 3.0;
  bool contrast = true;  // also sweep kappa = 0 with balanced weighting
};

struct DecayBlock {
  std::vector<double> sigmas{0.0};
  double summability = 1.0;
  double alpha = 0.25;
  double lyapunov_M = 1.0;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::green_verify;
  GridBlock grid;
  ParamsBlock params;
  std::optional<int> j0;  // defaults to default_j0(params)
  DecayProfile profile;
  StepperBlock stepper;
  OutputBlock output;
  GreenBlock green;
  KernelBlock kernel;
  DecayBlock decay;

  ModelParams model_params() const;
  Model model() const;
  int resolved_j0() const;
};

// Carries every problem found in a document, one line each.
struct ConfigError : std::runtime_error {
  std::vector<std::string> errors;
  explicit ConfigError(std::vector<std::string> errs);
};

// `section.key = value` lines, '#' starts a comment.  Reals accept a trailing
// "pi" ("64pi", "0.5*pi").  Overrides use the same syntax and are applied
// after the document.  Throws ConfigError listing all problems.
ExperimentConfig parse_config(const std::string& text,
                              const std::vector<std::string>& overrides = {});

// constraint checks on a parsed config; empty when valid
std::vector<std::string> validate(const ExperimentConfig& cfg);

// canonical key = value listing of every field
std::vector<std::pair<std::string, std::string>> config_echo(const ExperimentConfig& cfg);

double parse_real(const std::string& s);

} // namespace cnsp
