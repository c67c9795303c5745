#include "diqkd/numkernel.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace diqkd {

namespace {

std::vector<int> strides_of(const std::vector<Subsystem>& systems) {
  std::vector<int> strides(systems.size());
  int s = 1;
  for (int i = static_cast<int>(systems.size()) - 1; i >= 0; --i) {
    strides[i] = s;
    s *= systems[i].dim;
  }
  return strides;
}

void check_systems(const std::vector<Subsystem>& systems) {
  std::set<std::string> seen;
  for (const auto& sub : systems) {
    if (sub.dim < 1) throw std::invalid_argument("subsystem '" + sub.label + "' has dim < 1");
    if (!seen.insert(sub.label).second)
      throw std::invalid_argument("duplicate subsystem label '" + sub.label + "'");
  }
}

}  // namespace

int total_dim(const std::vector<Subsystem>& systems) {
  int d = 1;
  for (const auto& sub : systems) d *= sub.dim;
  return d;
}

DensityOperator::DensityOperator(std::vector<Subsystem> systems, Mat mat)
    : systems_(std::move(systems)), mat_(std::move(mat)) {
  check_systems(systems_);
  if (mat_.rows() != mat_.cols() || mat_.rows() != total_dim(systems_))
    throw std::invalid_argument("operator shape does not match subsystem dims");
}

DensityOperator DensityOperator::from_pure(std::vector<Subsystem> systems, const Vec& psi) {
  if (psi.size() != total_dim(systems))
    throw std::invalid_argument("state vector length does not match subsystem dims");
  Mat m = psi * psi.adjoint();
  return DensityOperator(std::move(systems), std::move(m));
}

bool DensityOperator::has(const std::string& label) const {
  for (const auto& sub : systems_)
    if (sub.label == label) return true;
  return false;
}

int DensityOperator::index_of(const std::string& label) const {
  for (size_t i = 0; i < systems_.size(); ++i)
    if (systems_[i].label == label) return static_cast<int>(i);
  throw std::invalid_argument("unknown subsystem label '" + label + "'");
}

int DensityOperator::dim_of(const std::string& label) const {
  return systems_[index_of(label)].dim;
}

void DensityOperator::rename(const std::string& label, const std::string& new_label) {
  int i = index_of(label);
  if (new_label != label && has(new_label))
    throw std::invalid_argument("subsystem label '" + new_label + "' already in use");
  systems_[i].label = new_label;
}

DensityOperator DensityOperator::normalized() const {
  double tr = trace_real();
  if (std::abs(tr) < 1e-300) throw std::runtime_error("cannot normalize: trace is zero");
  DensityOperator out = *this;
  out.mat_ /= tr;
  return out;
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

DensityOperator permute_subsystems(const DensityOperator& rho,
                                   const std::vector<std::string>& new_order) {
  const auto& systems = rho.systems();
  if (new_order.size() != systems.size())
    throw std::invalid_argument("permutation must list every subsystem exactly once");

  std::vector<int> perm(new_order.size());
  std::vector<bool> used(systems.size(), false);
  for (size_t n = 0; n < new_order.size(); ++n) {
    int i = rho.index_of(new_order[n]);
    if (used[i]) throw std::invalid_argument("permutation repeats label '" + new_order[n] + "'");
    used[i] = true;
    perm[n] = i;
  }

  bool identity = true;
  for (size_t n = 0; n < perm.size(); ++n)
    if (perm[n] != static_cast<int>(n)) identity = false;
  if (identity) return rho;

  auto old_strides = strides_of(systems);
  std::vector<Subsystem> new_systems(systems.size());
  for (size_t n = 0; n < perm.size(); ++n) new_systems[n] = systems[perm[n]];

  const int dim = rho.dim();
  std::vector<int> map(dim);
  std::vector<int> digits(systems.size(), 0);
  for (int idx = 0; idx < dim; ++idx) {
    int old = 0;
    for (size_t n = 0; n < perm.size(); ++n) old += digits[n] * old_strides[perm[n]];
    map[idx] = old;
    for (int n = static_cast<int>(digits.size()) - 1; n >= 0; --n) {
      if (++digits[n] < new_systems[n].dim) break;
      digits[n] = 0;
    }
  }

  Mat out(dim, dim);
  const Mat& in = rho.mat();
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) out(i, j) = in(map[i], map[j]);
  return DensityOperator(std::move(new_systems), std::move(out));
}

DensityOperator partial_trace(const DensityOperator& rho,
                              const std::vector<std::string>& keep) {
  if (keep.empty()) throw std::invalid_argument("partial_trace needs at least one kept label");
  std::vector<std::string> order = keep;
  std::set<std::string> keep_set(keep.begin(), keep.end());
  if (keep_set.size() != keep.size())
    throw std::invalid_argument("keep list repeats a label");
  for (const auto& sub : rho.systems())
    if (!keep_set.count(sub.label)) order.push_back(sub.label);

  DensityOperator p = permute_subsystems(rho, order);
  std::vector<Subsystem> kept(p.systems().begin(), p.systems().begin() + keep.size());
  const int m = total_dim(kept);
  const int r = p.dim() / m;

  Mat out = Mat::Zero(m, m);
  const Mat& in = p.mat();
  for (int s = 0; s < m; ++s)
    for (int t = 0; t < m; ++t) {
      Cplx acc = 0.0;
      for (int e = 0; e < r; ++e) acc += in(s * r + e, t * r + e);
      out(s, t) = acc;
    }
  return DensityOperator(std::move(kept), std::move(out));
}

DensityOperator apply_kraus(const DensityOperator& rho,
                            const std::vector<std::string>& labels,
                            const std::vector<Mat>& kraus) {
  if (labels.empty()) throw std::invalid_argument("apply_kraus: no target labels");
  if (kraus.empty()) throw std::invalid_argument("apply_kraus: empty Kraus set");

  std::vector<std::string> original;
  for (const auto& sub : rho.systems()) original.push_back(sub.label);
  std::vector<std::string> order = labels;
  std::set<std::string> front(labels.begin(), labels.end());
  if (front.size() != labels.size())
    throw std::invalid_argument("apply_kraus: target labels repeat");
  for (const auto& name : original)
    if (!front.count(name)) order.push_back(name);

  DensityOperator p = permute_subsystems(rho, order);
  int m = 1;
  for (const auto& name : labels) m *= p.dim_of(name);
  const int dim = p.dim();
  const int r = dim / m;
  for (const auto& k : kraus)
    if (k.rows() != m || k.cols() != m)
      throw std::invalid_argument("apply_kraus: Kraus matrix shape does not match target dims");

  const Mat& in = p.mat();
  Mat acc = Mat::Zero(dim, dim);
  Mat left(dim, dim);
  for (const auto& k : kraus) {
    left.setZero();
    for (int s = 0; s < m; ++s)
      for (int t = 0; t < m; ++t) {
        if (k(s, t) == Cplx(0.0)) continue;
        left.middleRows(s * r, r) += k(s, t) * in.middleRows(t * r, r);
      }
    for (int s = 0; s < m; ++s)
      for (int t = 0; t < m; ++t) {
        if (k(s, t) == Cplx(0.0)) continue;
        acc.middleCols(s * r, r) += std::conj(k(s, t)) * left.middleCols(t * r, r);
      }
  }
  DensityOperator out(p.systems(), std::move(acc));
  return permute_subsystems(out, original);
}

DensityOperator apply_unitary(const DensityOperator& rho,
                              const std::vector<std::string>& labels,
                              const Mat& u) {
  return apply_kraus(rho, labels, {u});
}

DensityOperator weighted_block_trace(const DensityOperator& rho,
                                     const std::string& label,
                                     const std::vector<double>& weights) {
  const int d = rho.dim_of(label);
  if (static_cast<int>(weights.size()) != d)
    throw std::invalid_argument("weighted_block_trace: weight count does not match dim of '" +
                                label + "'");
  if (rho.systems().size() == 1)
    throw std::invalid_argument("weighted_block_trace: cannot remove the only subsystem");

  std::vector<std::string> order = {label};
  for (const auto& sub : rho.systems())
    if (sub.label != label) order.push_back(sub.label);
  DensityOperator p = permute_subsystems(rho, order);

  const int r = p.dim() / d;
  Mat out = Mat::Zero(r, r);
  for (int n = 0; n < d; ++n) out += weights[n] * p.mat().block(n * r, n * r, r, r);
  std::vector<Subsystem> rest(p.systems().begin() + 1, p.systems().end());
  return DensityOperator(std::move(rest), std::move(out));
}

std::array<double, 3> singvals3(const Eigen::Matrix3d& t) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(t);
  auto s = svd.singularValues();
  return {s(0), s(1), s(2)};  // Eigen returns them sorted descending
}

bool is_hermitian(const Mat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

double min_eigenvalue_hermitian(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace diqkd
