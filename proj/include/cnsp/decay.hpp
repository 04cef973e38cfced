#pragma once

#include "cnsp/lpaley.hpp"
#include "cnsp/solver.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace cnsp {

enum class Flavor { deterministic_powerlaw, random_phase };
// Which pair carries the prescribed block profile: (Lambda^{-1} a0, m0) or (a0, m0).
enum class Anchor { lambda_inv_a, a };

Flavor parse_flavor(const std::string& s);
Anchor parse_anchor(const std::string& s);
std::string to_string(Flavor f);
std::string to_string(Anchor a);

// sigma_0 = -d/p for 2 <= p < 2d and -d/p' for 1 <= p < 2
double sigma0(int dim, double p);

struct DecayProfile {
  double sigma1 = -1.0;
  double p = 2.0;
  double amplitude = 1e-3;
  std::uint64_t seed = 1;
  Flavor flavor = Flavor::random_phase;
  Anchor anchor = Anchor::lambda_inv_a;

  // regularity index of (Lambda^{-1} a0, m0): a-anchored data at sigma1 put
  // Lambda^{-1} a0 at sigma1 + 1 and m0 at sigma1, so the pair sits at sigma1 + 1
  // whenever sigma1 + 1 is admissible for m0 as well (it is, m0 being smoother
  // in the homogeneous low-frequency scale).
  double theorem_sigma1() const { return anchor == Anchor::a ? sigma1 + 1.0 : sigma1; }
  // throws std::invalid_argument if theorem_sigma1 leaves [sigma0 - 1, d/p - 1)
  void validate(int dim) const;
};

// Per-block targets of the anchored pair: amplitude 2^{-j sigma1} for j <= j0,
// a quarter of that at j0 + 1, nothing above.  The modulus profile is
// sum_j beta_j phi_j(xi)^2 with beta solving the tridiagonal system that makes
// the L^2 block norms hit the targets exactly; random_phase draws the phases
// from the seed, deterministic_powerlaw uses zero phase.  The vector part m0
// splits the modulus evenly over the components.  Returns the state in the
// requested form (velocity form divides by 1 + a pointwise).
CnspState synth_initial(const DecayProfile& prof, GridPtr g, int j0, Form form = Form::momentum);

enum class Quantity { density, momentum, velocity };
std::string to_string(Quantity q);

// Closed-form decay exponents: density (sigma - sigma1 + 1)/2 for
// sigma1 - 1 < sigma <= d/p, momentum (sigma - sigma1)/2 for sigma1 < sigma <= d/p,
// velocity (sigma - sigma1)/2 for min(sigma0, sigma1) < sigma <= d/p + 1.
// Out-of-range sigma throws std::domain_error naming the inequality.
double predicted_exponent(Quantity q, double sigma, double sigma1, int dim, double p);

// t_valid = alpha (L / 2pi)^2
double box_valid_until(const Grid& g, double alpha = 0.25);

struct RateFit {
  double exponent = 0.0;  // y ~ (1+t)^{-exponent}
  double halfwidth = 0.0; // two standard errors of the slope
  double residual_rms = 0.0;
  int samples = 0;
  double t_lo = 0.0;
  double t_hi = 0.0;
};

// least squares of log y against log(1+t) over t in [t_lo, t_hi]; needs 12 samples
RateFit fit_rate(std::span<const double> t, std::span<const double> y, double t_lo, double t_hi);

// Maxima of y over consecutive windows of the given length covering [t_lo, t_hi].
// Oscillating norms are fitted through this envelope.
void upper_envelope(std::span<const double> t, std::span<const double> y, double window,
                    double t_lo, double t_hi, std::vector<double>& te, std::vector<double>& ye);

// One evaluation of the two functionals and their itemized terms.
struct LyapunovSample {
  double t = 0.0;
  std::array<double, 5> X_terms{};
  double X = 0.0;
  std::array<double, 4> D_terms{};
  double D = 0.0;
};

// Running evaluation of the energy-dissipation functional X_p and the
// time-weighted functional D_{p,M} along a trajectory.  Chemin-Lerner sup
// norms are per-block running maxima, time integrals are trapezoidal in the
// observation times.
//   X terms: a^l  L~inf B^{d/p-2},  a^h  L~inf B^{d/p},  a  L1 B^{d/p},
//            u    L~inf B^{d/p-1},  u    L1 B^{d/p+1}
//   D terms: t^M (Lambda^{-1}a, u)^l  L~inf B^{d/p+1},  same in L1 B^{d/p+3},
//            t^M (Lambda a, u)^h L~inf B^{d/p-1},  t^M (a, Lambda u)^h L1 B^{d/p}
class LyapunovTracker {
public:
  LyapunovTracker(GridPtr g, int j0, double p, double M = 1.0);
  void observe(double t, const SpectralField& a, const SpectralField& u);
  const std::vector<LyapunovSample>& samples() const { return samples_; }
  double X() const;
  double D() const;

private:
  struct Track {
    double s;
    bool integral;
    bool weighted;
    std::vector<double> acc;   // running max, or running integral, per block
    std::vector<double> prev;  // integrand at the previous time
  };
  void update(Track& tr, const std::vector<double>& b, double t, double dt);
  double value(const Track& tr) const;

  GridPtr g_;
  int j0_;
  double p_;
  double M_;
  int j_min_;
  double t_prev_ = 0.0;
  bool first_ = true;
  std::vector<Track> tracks_;
  std::vector<LyapunovSample> samples_;
};

struct DecayReport {
  Quantity quantity = Quantity::density;
  double p = 2.0;
  double sigma = 0.0;
  double sigma1 = 0.0;  // theorem index of the data
  double fitted = 0.0;
  double halfwidth = 0.0;
  double predicted = 0.0;  // NaN when sigma is outside the quantity's range
  double gap = 0.0;        // density minus velocity fitted exponent at this sigma
  double t_lo = 0.0;
  double t_hi = 0.0;
  double box_valid_until = 0.0;
  double kappa = 0.0;
  std::uint64_t seed = 0;
  double residual_rms = 0.0;
  int samples = 0;
};

void write_report_csv_header(std::ostream& os);
void write_report_csv(std::ostream& os, const std::vector<DecayReport>& rows);

struct DecaySetup {
  int dim = 2;
  int n = 256;
  double box_length = 64.0 * M_PI;
  Model model;
  int j0 = -1;
  DecayProfile profile;
  bool nonlinear = false;
  StepperConfig stepper;  // nonlinear runs only
  Form form = Form::momentum;
  double sample_dt = 0.25;
  double alpha = 0.25;
  double t_end = 0.0;  // 0 means box_valid_until
  std::vector<double> sigmas{0.0};
  double summability = 1.0;  // r of the reported B^sigma_{p,r} norms
  double lyapunov_M = 1.0;
  bool track_lyapunov = true;
};

struct DecayRun {
  std::vector<DecayReport> besov;    // B^sigma_{p,r}, r = summability
  std::vector<DecayReport> lebesgue; // plain L^p norms (sigma = 0 rows)
  NormSeries density, momentum, velocity;
  std::vector<double> t;
  std::vector<double> mass;          // mean of a
  std::vector<double> low_sigma1;    // ||(Lambda^{-1}a, m)^l||_{B^{sigma1}_{p,inf}}
  std::vector<double> lp_density, lp_velocity;
  std::vector<LyapunovSample> lyapunov;
  double box_valid_until = 0.0;
  double max_density_dev = 0.0;      // max |a| over the run
  bool aborted = false;
  std::string reason;
  std::string fit_error;  // set when the fit window holds too few samples
  CnspState final_state;
};

using DecayObserver = std::function<void(const CnspState&)>;

DecayRun decay_experiment(const DecaySetup& setup, const DecayObserver& extra = {});

} // namespace cnsp
