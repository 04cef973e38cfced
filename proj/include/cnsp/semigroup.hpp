#pragma once

#include "cnsp/expm.hpp"
#include "cnsp/grid.hpp"

#include <span>
#include <string>
#include <vector>

namespace cnsp {

// Reference viscosities and the two low-frequency coefficients of the
// linearized system: pressure slope gamma = P'(1) and the field coupling kappa.
struct ModelParams {
  double mu1_bar = 1.0;
  double mu2_bar = 0.0;
  double kappa = 1.0;
  double gamma = 1.0;

  double mu_bar() const { return 2.0 * mu1_bar + mu2_bar; }
  // kappa + gamma |xi|^2
  double c(double r2) const { return kappa + gamma * r2; }
  void validate() const;
};

// State scaling for the density component: v1 = h(|xi|) a_hat.
//   hweighted: h = (1+|xi|^2)/|xi|   (Lambda^{-1} Hhat a)
//   plain:     h = 1/|xi|            (Lambda^{-1} a)
//   balanced:  h = sqrt|kappa + gamma |xi|^2| / |xi|
enum class Weighting { hweighted, plain, balanced };

Weighting parse_weighting(const std::string& s);
std::string to_string(Weighting w);

struct Eigenvalues {
  cd plus;
  cd minus;
  bool confluent = false;
};

// roots of lambda^2 + mu_bar |xi|^2 lambda + kappa + gamma |xi|^2 = 0
Eigenvalues eigenvalues(double r, const ModelParams& prm);

// |xi| where the discriminant vanishes
double critical_xi0(const ModelParams& prm);
// largest j with 2^j <= xi0 / 2 (xi0 taken at kappa = 0 when kappa < 0)
int default_j0(const ModelParams& prm);

// Scalar functions of |xi| and t that make up the propagator.
//   E  = (e^{l+ t} - e^{l- t}) / (l+ - l-)
//   p1 = density-density entry
//   L  = longitudinal velocity entry
//   p0 = e^{-mu1_bar |xi|^2 t} (transverse velocity entry)
struct GreenCoeffs {
  cd lambda_plus;
  cd lambda_minus;
  cd E;
  cd p1;
  cd L;
  double p0 = 1.0;
  bool confluent = false;
};

GreenCoeffs green_coeffs(double t, double r, const ModelParams& prm);

// h |xi| and c / (|xi| h) for the chosen weighting
double weight_forward(double r, const ModelParams& prm, Weighting w);
double weight_backward(double r, const ModelParams& prm, Weighting w);

struct GreenSymbol {
  cd lambda_plus;
  cd lambda_minus;
  cd B;  // oscillation factor, lambda = -mu_bar|xi|^2/2 +- iB
  cd p0, p1, p2, p3, p4;
  bool confluent = false;
  CMat matrix;  // (d+1)x(d+1), rows/cols ordered (v1, u_1..u_d)
};

// Closed form of exp(t M(xi)).  Entries:
//   [ p1            -p2 xi^T           ]
//   [ -p3 xi        p0 I + p4 xi xi^T  ]
// with p2 = i h E, p3 = i c E / (|xi|^2 h), p4 = (L - p0)/|xi|^2.
// At xi = 0 the symbol is the identity.
GreenSymbol green_symbol(double t, std::span<const double> xi, const ModelParams& prm,
                         Weighting w = Weighting::hweighted);

// generator M(xi) of the linear system in the weighted variables
CMat generator(std::span<const double> xi, const ModelParams& prm,
               Weighting w = Weighting::hweighted);

// exp(t M(xi)) by scaling and squaring, independent of the closed form
CMat matexp_oracle(double t, std::span<const double> xi, const ModelParams& prm,
                   Weighting w = Weighting::hweighted);

// Propagator in the unweighted variables (a_hat, u_hat), row-major into out.
void plain_propagator(double t, std::span<const double> xi, const ModelParams& prm, cd* out);

// Linear evolution of (a, u) by exact multiplication mode by mode.
void apply_semigroup(double t, SpectralField& a, SpectralField& u, const ModelParams& prm);

// Per-mode propagator table for repeated stepping with a fixed dt.
struct PropagatorTable {
  int m = 0;
  std::vector<cd> mats;
};
PropagatorTable propagator_table(const Grid& g, double dt, const ModelParams& prm);

// ||F^{-1}(e^{iB t} phi(2^{-j} .))||_{L^1} / ||F^{-1} phi(2^{-j} .)||_{L^1}
double dispersion_growth(int j, double t, int dim, const ModelParams& prm);

} // namespace cnsp
