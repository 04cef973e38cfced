#pragma once

#include "cnsp/grid.hpp"
#include "cnsp/semigroup.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cnsp {

// Constitutive laws.  Pressure P(rho) = gamma (rho^e - 1)/e (e = 1 is the
// linear law, so P'(1) = gamma always) and viscosities mu_i(rho) = mu_i_bar rho^beta.
struct Model {
  ModelParams lin;
  double pressure_exponent = 1.0;
  double viscosity_exponent = 0.0;

  double P(double rho) const;
  double dP(double rho) const;
  double mu1(double rho) const;
  double mu2(double rho) const;
  bool constant_viscosity() const { return viscosity_exponent == 0.0; }
  void validate() const;
};

enum class Composite { Q, G, H, mu1_tilde, mu2_tilde };

// Q(a) = 1/(1+a) - 1, G(a) = gamma - P'(1+a)/(1+a), H(a) = P(1+a) - P(1) - gamma a,
// mu_i~(a) = mu_i(1+a) - mu_i_bar.  Requires ||a||_inf < 1.
PhysicalField composite(Composite fn, const PhysicalField& a, const Model& model);
double composite_value(Composite fn, double a, const Model& model);

enum class Form { velocity, momentum };
enum class Scheme { etd1, etd2rk };

Form parse_form(const std::string& s);
Scheme parse_scheme(const std::string& s);

struct CnspState {
  Form form = Form::velocity;
  double t = 0.0;
  SpectralField a;
  SpectralField v;  // u in velocity form, m = (1+a)u in momentum form
};

struct StepperConfig {
  double dt = 1e-2;
  Scheme scheme = Scheme::etd2rk;
  bool dealias = true;
  double cfl_target = 0.5;
  bool nonlinear = true;
  void validate() const;
};

struct NumericalAbort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CflViolation : NumericalAbort {
  double suggested_dt;
  CflViolation(const std::string& msg, double dt) : NumericalAbort(msg), suggested_dt(dt) {}
};

// Velocity form: g1 + g2 + g3 + g4 where g4 = Q(a) Abar u is the part of
// A(u)/rho - Abar u that does not involve the viscosity fluctuation.
SpectralField nonlinear_g(const Model& model, const SpectralField& a, const SpectralField& u,
                          bool dealias = true);
// Momentum form: the tensor N with d_t m - Abar m + gamma grad a + kappa grad Lambda^{-2} a = div N.
SpectralField nonlinear_N(const Model& model, const SpectralField& a, const SpectralField& m,
                          bool dealias = true);
SpectralField tensor_divergence(const SpectralField& T);

struct NonlinearTerms {
  SpectralField fa;
  SpectralField fv;
  double max_speed = 0.0;
  double min_density = 1.0;
};

NonlinearTerms nonlinear_rhs(const Model& model, Form form, const SpectralField& a,
                             const SpectralField& v, bool dealias);

// generator of the linear flow in (a_hat, v_hat) for one mode, row-major (d+1)^2
void plain_generator(std::span<const double> k, const ModelParams& prm, cd* out);

class Stepper {
public:
  Stepper(GridPtr grid, const Model& model, const StepperConfig& cfg);
  void step(CnspState& s) const;
  const StepperConfig& config() const { return cfg_; }
  const Model& model() const { return model_; }
  double k_max() const { return grid_->k_axis_max(); }

private:
  GridPtr grid_;
  Model model_;
  StepperConfig cfg_;
  int m_;
  std::vector<cd> E_;
  std::vector<cd> phi1_;
  std::vector<cd> phi2_;
};

CnspState to_form(const CnspState& s, Form target);
SpectralField velocity_of(const CnspState& s);
SpectralField momentum_of(const CnspState& s);

// w = Q u + (1/mu_bar) grad Lambda^{-2}(gamma a + kappa Lambda^{-2} a)
SpectralField effective_velocity(const ModelParams& prm, const SpectralField& a,
                                 const SpectralField& u);

struct RunResult {
  CnspState state;
  CnspState last_healthy;
  bool aborted = false;
  std::string reason;
  long steps = 0;
};

using Observer = std::function<void(const CnspState&)>;

// Takes round(t_end/dt) steps (t_end must be a multiple of dt) and calls the
// observer at t = 0, every observe_every steps and at the end.
RunResult run(const CnspState& init, const Stepper& stepper, double t_end, long observe_every,
              const Observer& obs);

} // namespace cnsp
