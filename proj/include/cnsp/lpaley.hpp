#pragma once

#include "cnsp/grid.hpp"
#include "cnsp/kernels.hpp"

#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace cnsp {

constexpr double inf = std::numeric_limits<double>::infinity();

// Smooth radial cutoff: chi = 1 on [0, 3/4], 0 beyond 4/3, and
// phi(r) = chi(r/2) - chi(r) supported in [3/4, 8/3].
class DyadicPartition {
public:
  explicit DyadicPartition(int samples = 4096);
  double chi(double r) const;
  double phi(double r) const { return chi(0.5 * r) - chi(r); }
  static double chi_exact(double r);

private:
  std::vector<double> table_;
  double h_;
};

const DyadicPartition& partition();

struct BlockRange {
  int j_min;
  int j_max;
  int count() const { return j_max - j_min + 1; }
};

// smallest j with 2^j 8/3 > k_min, largest j with 2^j 3/4 < k_corner
BlockRange block_range(const Grid& g);

struct BesovSpec {
  double s = 0.0;
  double p = 2.0;
  double r = 1.0;
};

enum class Part { whole, low, high };

// Which frequencies a norm looks at.  Part::low applies chi(2^{-j0} D) first
// (the low-frequency cut), Part::high applies 1 - chi(2^{-j0} D).
// lambda_power applies |D|^lambda_power before the blocks are taken.
struct NormOptions {
  Part part = Part::whole;
  int j0 = 0;
  double lambda_power = 0.0;
};

// Per-grid cached block membership of every mode.
class BlockTable {
public:
  explicit BlockTable(const Grid& g);
  const BlockRange& range() const { return range_; }
  const kernels::ModeBlocks& modes() const { return mb_; }

private:
  BlockRange range_;
  kernels::ModeBlocks mb_;
};

const BlockTable& block_table(const GridPtr& g);

SpectralField dyadic_block(const SpectralField& f, int j);
SpectralField low_frequency(const SpectralField& f, int j0);
SpectralField high_frequency(const SpectralField& f, int j0);
SpectralField apply_lambda(const SpectralField& f, double power);

// ||Delta_j f||_{L^p} for j = j_min..j_max (index j - j_min).  p = 2 uses
// Parseval; other p synthesize each block and integrate on the lattice.
std::vector<double> block_norms(const SpectralField& f, double p, const NormOptions& opt = {});

// l^r over j of 2^{js} b_j, restricted to blocks in [jlo, jhi]
double besov_from_blocks(const std::vector<double>& b, int j_min, double s, double r,
                         int jlo = std::numeric_limits<int>::min(),
                         int jhi = std::numeric_limits<int>::max());

double besov_norm(const SpectralField& f, const BesovSpec& spec, const NormOptions& opt = {});

// Block norms sampled in time for one field.
struct NormSeries {
  double p = 2.0;
  int j_min = 0;
  std::vector<double> t;
  std::vector<std::vector<double>> blocks;

  void push(double time, std::vector<double> b);
};

// Chemin-Lerner norm: L^rho in time (trapezoidal, rho = inf is a running sup)
// of each block, then l^r over j with weights 2^{js}.
double chemin_lerner_norm(const NormSeries& series, double rho, double s, double r,
                          int jlo = std::numeric_limits<int>::min(),
                          int jhi = std::numeric_limits<int>::max());

// L^rho-in-time norm of the Besov series (the non-tilde space)
double time_lebesgue_of_besov(const NormSeries& series, double rho, double s, double r);

// Trapezoidal integral of y(t); helper shared with the decay functionals.
double trapezoid(const std::vector<double>& t, const std::vector<double>& y);

void write_block_csv_header(std::ostream& os);
void write_block_csv(std::ostream& os, const NormSeries& series);
void write_besov_summary_header(std::ostream& os);
void write_besov_summary_row(std::ostream& os, const std::string& quantity, double t, double s,
                             double p, double r, double value);

} // namespace cnsp
