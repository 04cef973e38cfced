#include "cnsp/expm.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace cnsp {

namespace {

constexpr double theta13 = 5.371920351148152;
constexpr double pade13[14] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                               1187353796428800.0,  129060195264000.0,   10559470521600.0,
                               670442572800.0,      33522128640.0,       1323241920.0,
                               40840800.0,          960960.0,            16380.0,
                               182.0,               1.0};

// Parlett-Reinsch balancing with radix 2, so the scaling is exact in floating point
std::vector<double> balance(CMat& A) {
  const int n = (int)A.rows();
  std::vector<double> scale(n, 1.0);
  bool done = false;
  for (int sweep = 0; sweep < 100 && !done; ++sweep) {
    done = true;
    for (int i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (int k = 0; k < n; ++k) {
        if (k == i) continue;
        c += std::abs(A(k, i));
        r += std::abs(A(i, k));
      }
      if (c == 0.0 || r == 0.0) continue;
      double f = 1.0, g = r / 2.0, s = c + r;
      while (c < g) {
        f *= 2.0;
        c *= 4.0;
      }
      g = r * 2.0;
      while (c >= g) {
        f /= 2.0;
        c /= 4.0;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        scale[i] *= f;
        A.row(i) /= f;
        A.col(i) *= f;
      }
    }
  }
  return scale;
}

double norm1(const CMat& A) {
  double m = 0.0;
  for (int j = 0; j < A.cols(); ++j) m = std::max(m, A.col(j).cwiseAbs().sum());
  return m;
}

CMat pade_expm(const CMat& A0) {
  const int n = (int)A0.rows();
  double nrm = norm1(A0);
  if (!std::isfinite(nrm)) throw std::domain_error("expm of a non-finite matrix");
  int s = 0;
  if (nrm > theta13) s = (int)std::ceil(std::log2(nrm / theta13));
  CMat A = A0 * std::ldexp(1.0, -s);
  CMat I = CMat::Identity(n, n);
  CMat A2 = A * A, A4 = A2 * A2, A6 = A4 * A2;
  const double* b = pade13;
  CMat U = A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 +
                b[1] * I);
  CMat V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
  CMat R = (V - U).partialPivLu().solve(V + U);
  for (int k = 0; k < s; ++k) R = R * R;
  return R;
}

} // namespace

CMat expm(const CMat& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("expm needs a square matrix");
  CMat B = A;
  auto d = balance(B);
  CMat E = pade_expm(B);
  for (int i = 0; i < E.rows(); ++i)
    for (int j = 0; j < E.cols(); ++j) E(i, j) *= d[i] / d[j];
  return E;
}

PhiSet phi_functions(const CMat& A) {
  const int n = (int)A.rows();
  CMat big = CMat::Zero(3 * n, 3 * n);
  big.block(0, 0, n, n) = A;
  big.block(0, n, n, n) = CMat::Identity(n, n);
  big.block(n, 2 * n, n, n) = CMat::Identity(n, n);
  CMat E = expm(big);
  return {E.block(0, 0, n, n), E.block(0, n, n, n), E.block(0, 2 * n, n, n)};
}

} // namespace cnsp
