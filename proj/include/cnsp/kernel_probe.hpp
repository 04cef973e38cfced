#pragma once

#include "cnsp/semigroup.hpp"

#include <span>
#include <vector>

namespace cnsp {

// The L^1 norm is invariant under dilation, so the block-j kernel is probed in
// rescaled frequency eta = xi / 2^j on an auxiliary periodic box.  The box
// holds a ball of `radius` (rescaled units) plus the distance a wave packet
// can travel by time t; `oversample` is the Nyquist frequency over the block
// edge 8/3.  If the box would exceed max_n points per axis the oversampling is
// relaxed down to min_oversample and then, if allowed, the box is truncated.
struct KernelProbeOptions {
  double oversample = 4.0;
  double min_oversample = 2.0;
  double radius = 64.0;
  int max_n = 2048;
  bool allow_truncation = false;
  Weighting weighting = Weighting::hweighted;
};

struct KernelSample {
  int j = 0;
  double t = 0.0;
  double tau = 0.0;      // t 2^{2j}
  double value = 0.0;    // max over the representative entries
  std::vector<double> entries;
  int n_aux = 0;
  double box = 0.0;      // rescaled box length
  double oversample = 0.0;
  bool truncated = false;
  double edge_fraction = 0.0;  // share of the L^1 mass in the outer 20% of the box
  // truncated samples are not evaluated: value is NaN
};

// Representative entries (row, col) of the propagator; every other entry is a
// rotation or reflection of one of these.
std::vector<std::pair<int, int>> representative_entries(int dim);

std::vector<KernelSample> kernel_l1_profile(int j, std::span<const double> t_list, int dim,
                                            const ModelParams& prm,
                                            const KernelProbeOptions& opt = {});

// Fit of the exponential weight for the j-uniform bound.  r0 is the largest
// value on a 1/200 grid in [0, r0_max] for which the weighted sups
// S_j = sup_t e^{r0 2^{2j} t} K_j(t) satisfy max_j S_j / min_j S_j < ratio_limit
// and no weighted profile has a positive log-slope (least squares) over the
// second half of its usable window, so the bound does not hinge on where the
// window stops.
// Samples from a truncated box end the usable window.
struct BoundFit {
  double r0 = 0.0;
  bool found = false;
  std::vector<int> js;
  std::vector<double> sups;
  double ratio = 0.0;
};

std::vector<double> weighted_sups(const std::vector<std::vector<KernelSample>>& profiles, double r0,
                                  std::vector<bool>* rising_at_end = nullptr);
BoundFit fit_kernel_bound(const std::vector<std::vector<KernelSample>>& profiles,
                          double ratio_limit = 3.0, double r0_max = 2.0);

// least-squares slope of log2(y) against j
double log2_slope(const std::vector<int>& js, const std::vector<double>& y);

} // namespace cnsp
