#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <string>
#include <vector>

namespace diqkd {

using Cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

struct Subsystem {
  std::string label;
  int dim = 0;
};

// Dense operator on an ordered tensor product of labeled subsystems.
// Index convention: the first subsystem is the most significant digit,
// i.e. full index = ((i0*d1 + i1)*d2 + i2)*...
class DensityOperator {
 public:
  DensityOperator() = default;
  DensityOperator(std::vector<Subsystem> systems, Mat mat);

  static DensityOperator from_pure(std::vector<Subsystem> systems, const Vec& psi);

  const std::vector<Subsystem>& systems() const { return systems_; }
  const Mat& mat() const { return mat_; }
  Mat& mat() { return mat_; }
  int dim() const { return static_cast<int>(mat_.rows()); }

  bool has(const std::string& label) const;
  int index_of(const std::string& label) const;  // throws on unknown label
  int dim_of(const std::string& label) const;
  void rename(const std::string& label, const std::string& new_label);

  double trace_real() const { return mat_.trace().real(); }
  DensityOperator normalized() const;

 private:
  std::vector<Subsystem> systems_;
  Mat mat_;
};

Mat kron(const Mat& a, const Mat& b);

int total_dim(const std::vector<Subsystem>& systems);

// Reorders the tensor factors; new_order must be a permutation of the labels.
DensityOperator permute_subsystems(const DensityOperator& rho,
                                   const std::vector<std::string>& new_order);

// Traces out every subsystem not named in keep; result factors follow the
// order given in keep.
DensityOperator partial_trace(const DensityOperator& rho,
                              const std::vector<std::string>& keep);

// rho -> sum_k (K_k (x) 1) rho (K_k (x) 1)^dag with each K_k acting on the
// joint space of `labels` in the given order.  Trace-preserving only if the
// Kraus set resolves the identity; callers may pass deliberately lossy sets.
DensityOperator apply_kraus(const DensityOperator& rho,
                            const std::vector<std::string>& labels,
                            const std::vector<Mat>& kraus);

DensityOperator apply_unitary(const DensityOperator& rho,
                              const std::vector<std::string>& labels,
                              const Mat& u);

// Removes one subsystem, weighting its diagonal blocks:
//   out = sum_n w[n] <n|rho|n>.
// With all-ones weights this is the partial trace over `label`.
DensityOperator weighted_block_trace(const DensityOperator& rho,
                                     const std::string& label,
                                     const std::vector<double>& weights);

// Singular values of a real 3x3 matrix, sorted descending.
std::array<double, 3> singvals3(const Eigen::Matrix3d& t);

bool is_hermitian(const Mat& m, double tol = 1e-10);
double min_eigenvalue_hermitian(const Mat& m);

}  // namespace diqkd
