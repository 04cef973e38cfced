#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace cnsp {

using cd = std::complex<double>;

// Periodic box [0, L)^dim with n points per axis.  Modes are stored row-major
// with the last axis fastest, same ordering as the physical samples.
class Grid {
public:
  Grid(int dim, int n, double box_length);

  int dim() const { return dim_; }
  int n() const { return n_; }
  double box_length() const { return L_; }
  std::size_t size() const { return size_; }
  double dx() const { return L_ / n_; }
  double dk() const { return 2.0 * M_PI / L_; }
  double cell_volume() const;
  double volume() const;

  // signed integer wavenumber index along an axis (Nyquist maps to -n/2)
  int mode_index(std::size_t idx, int axis) const { return mode_index_[idx * dim_ + axis]; }
  double k(std::size_t idx, int axis) const { return dk() * mode_index(idx, axis); }
  double k2(std::size_t idx) const { return k2_[idx]; }
  double kmag(std::size_t idx) const { return kmag_[idx]; }
  bool is_nyquist(std::size_t idx, int axis) const { return mode_index(idx, axis) == -n_ / 2; }
  bool dealias_keep(std::size_t idx) const { return keep_[idx] != 0; }
  // wavenumber used for differentiation: zero on the Nyquist plane of that axis
  double kd(std::size_t idx, int axis) const { return is_nyquist(idx, axis) ? 0.0 : k(idx, axis); }

  double k_min() const { return dk(); }
  double k_axis_max() const { return dk() * (n_ / 2); }
  double k_corner() const;

  // coordinates of physical sample idx
  double x(std::size_t idx, int axis) const;

private:
  int dim_;
  int n_;
  double L_;
  std::size_t size_;
  std::vector<int> mode_index_;
  std::vector<double> k2_;
  std::vector<double> kmag_;
  std::vector<unsigned char> keep_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(int dim, int n, double box_length);

bool is_power_of_two(long n);

// rank counts components: 1 scalar, dim vector, dim*dim tensor (row-major)
struct PhysicalField {
  GridPtr grid;
  int rank = 1;
  std::vector<double> data;

  PhysicalField() = default;
  PhysicalField(GridPtr g, int components);
  std::span<double> comp(int c);
  std::span<const double> comp(int c) const;
};

struct SpectralField {
  GridPtr grid;
  int rank = 1;
  std::vector<cd> data;

  SpectralField() = default;
  SpectralField(GridPtr g, int components);
  std::span<cd> comp(int c);
  std::span<const cd> comp(int c) const;
};

// coef_k = (1/N) sum_x f(x) exp(-i k.x), so cos(x) has 0.5 at k = +-1
SpectralField forward(const PhysicalField& f);
// unnormalized synthesis; returns the real part
PhysicalField inverse(const SpectralField& f);

// low level: transforms of one component in place
void fft_forward(const Grid& g, std::span<cd> data);
void fft_inverse(const Grid& g, std::span<cd> data);
// unnormalized inverse on an n^dim box without building a Grid
void fft_inverse(int dim, int n, std::span<cd> data);

SpectralField derivative(const SpectralField& f, int axis);
SpectralField gradient(const SpectralField& scalar);
SpectralField divergence(const SpectralField& vec);
SpectralField project_solenoidal(const SpectralField& vec);
SpectralField project_compressible(const SpectralField& vec);
SpectralField dealias(const SpectralField& f);
void dealias_inplace(SpectralField& f);

// ||f||_{L^2}^2 = L^d sum |coef|^2
double l2_norm_spectral(const SpectralField& f);
double l2_norm_physical(const PhysicalField& f);
double lp_norm_physical(const PhysicalField& f, double p);

struct Snapshot {
  int dim = 0;
  int n = 0;
  double box_length = 0.0;
  int rank = 1;
  bool complex_payload = false;
  std::vector<double> payload;
};

void write_snapshot(const std::string& path, const PhysicalField& f);
void write_snapshot(const std::string& path, const SpectralField& f);
Snapshot read_snapshot(const std::string& path);

} // namespace cnsp
