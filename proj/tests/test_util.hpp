#pragma once

#include <random>

#include "diqkd/numkernel.hpp"

namespace testutil {

using diqkd::Cplx;
using diqkd::Mat;
using diqkd::Vec;

inline std::mt19937& rng() {
  static std::mt19937 gen(20240915);
  return gen;
}

inline Mat random_ginibre(int rows, int cols) {
  std::normal_distribution<double> n(0, 1);
  Mat g(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) g(i, j) = Cplx(n(rng()), n(rng()));
  return g;
}

// Haar-ish unitary via QR of a Ginibre matrix; exact unitarity is what
// matters for the tests, not the distribution.
inline Mat random_unitary(int d) {
  Eigen::HouseholderQR<Mat> qr(random_ginibre(d, d));
  Mat q = qr.householderQ();
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < d; ++i) {
    Cplx ph = r(i, i) / std::abs(r(i, i));
    q.col(i) *= ph;
  }
  return q;
}

inline Mat random_density(int d) {
  Mat g = random_ginibre(d, d);
  Mat rho = g * g.adjoint();
  return rho / rho.trace();
}

inline double fidelity_with_pure(const Vec& psi, const Mat& rho) {
  return (psi.adjoint() * rho * psi).value().real();
}

// State fidelity <psi|rho|psi> after aligning rho's subsystem order with
// the pure target's order.
inline double fidelity_with_pure(const diqkd::DensityOperator& target_pure,
                                 const diqkd::DensityOperator& rho) {
  std::vector<std::string> order;
  for (const auto& s : target_pure.systems()) order.push_back(s.label);
  diqkd::DensityOperator aligned = diqkd::permute_subsystems(rho, order);
  Eigen::SelfAdjointEigenSolver<Mat> es(target_pure.mat());
  int top = 0;
  es.eigenvalues().maxCoeff(&top);
  Vec psi = es.eigenvectors().col(top);
  return fidelity_with_pure(psi, aligned.mat());
}

}  // namespace testutil
