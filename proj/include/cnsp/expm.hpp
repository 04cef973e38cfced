#pragma once

#include <Eigen/Dense>

namespace cnsp {

using CMat = Eigen::MatrixXcd;

// Dense matrix exponential: power-of-two balancing, then scaling and squaring
// with the degree-13 Pade approximant.
CMat expm(const CMat& A);

// exp(A), phi1(A) = (e^A - I)/A and phi2(A) = (e^A - I - A)/A^2, read off the
// exponential of the block matrix [[A, I, 0], [0, 0, I], [0, 0, 0]].
struct PhiSet {
  CMat e;
  CMat phi1;
  CMat phi2;
};
PhiSet phi_functions(const CMat& A);

} // namespace cnsp
