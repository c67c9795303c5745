#include "diqkd/bell_keyrate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "diqkd/photonics.hpp"

namespace diqkd {

namespace {

const double kSqrt8 = 2 * std::sqrt(2.0);

Mat pauli(int i) {
  Mat m(2, 2);
  switch (i) {
    case 0: m << 1, 0, 0, 1; break;
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, Cplx(0, -1), Cplx(0, 1), 0; break;
    default: m << 1, 0, 0, -1; break;
  }
  return m;
}

Eigen::Vector3d unit_from_angles(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

std::pair<double, double> angles_from_unit(const Eigen::Vector3d& v) {
  return {std::acos(std::clamp(v.z(), -1.0, 1.0)), std::atan2(v.y(), v.x())};
}

}  // namespace

TwoQubitState TwoQubitState::from(const DensityOperator& rho) {
  if (rho.systems().size() != 2 || rho.systems()[0].dim != 2 || rho.systems()[1].dim != 2)
    throw std::invalid_argument("TwoQubitState requires exactly two qubit subsystems");
  if (std::abs(rho.trace_real() - 1) > 1e-10)
    throw std::invalid_argument("TwoQubitState requires unit trace");
  if (!is_hermitian(rho.mat()))
    throw std::invalid_argument("TwoQubitState requires a Hermitian operator");
  if (min_eigenvalue_hermitian(rho.mat()) < -1e-10)
    throw std::invalid_argument("TwoQubitState requires a positive semidefinite operator");
  return TwoQubitState{rho};
}

Eigen::Vector3d TwoQubitState::bloch_a() const {
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i)
    v(i) = (kron(pauli(i + 1), pauli(0)) * rho.mat()).trace().real();
  return v;
}

Eigen::Vector3d TwoQubitState::bloch_b() const {
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i)
    v(i) = (kron(pauli(0), pauli(i + 1)) * rho.mat()).trace().real();
  return v;
}

Eigen::Matrix3d correlation_matrix(const TwoQubitState& s) {
  Eigen::Matrix3d t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      t(i, j) = (kron(pauli(i + 1), pauli(j + 1)) * s.rho.mat()).trace().real();
  return t;
}

double chsh_horodecki(const Eigen::Matrix3d& t) {
  auto s = singvals3(t);
  return 2 * std::sqrt(s[0] * s[0] + s[1] * s[1]);
}

double qber_min(const Eigen::Matrix3d& t) {
  return (1 - singvals3(t)[0]) / 2;
}

double binary_entropy(double x) {
  if (!(x >= 0 && x <= 1)) throw std::invalid_argument("binary_entropy argument outside [0,1]");
  if (x == 0 || x == 1) return 0;
  return -x * std::log2(x) - (1 - x) * std::log2(1 - x);
}

double keyrate_factor(double mu, double Q, double S) {
  if (!(mu >= 0)) throw std::invalid_argument("mu must be non-negative");
  if (mu >= 1)
    throw std::invalid_argument("mu >= 1: indefinite events exhaust the definite statistics");
  if (!(Q >= 0 && Q <= 1)) throw std::invalid_argument("Q outside [0,1]");
  if (!(S >= 0 && S <= kSqrt8 + 1e-9))
    throw std::invalid_argument("S outside [0, 2*sqrt(2)]");
  S = std::min(S, kSqrt8);

  double s = (S - 4 * mu) / (1 - mu);
  double chi = 1;
  if (s > 2) {
    double x = std::sqrt(std::max(0.0, s * s / 4 - 1));
    chi = binary_entropy((1 + std::min(x, 1.0)) / 2);
  }
  return 1 - binary_entropy(Q) - ((1 - mu) * chi + mu);
}

AlicePovm alice_povm(const Eigen::Vector3d& direction, int d, double eta_d) {
  if (!(eta_d >= 0 && eta_d <= 1)) throw std::invalid_argument("eta_d outside [0,1]");
  Eigen::Vector3d a = direction.normalized();
  auto [theta, phi] = angles_from_unit(a);
  const double u = std::cos(theta / 2);
  const Cplx w = std::exp(Cplx(0, phi)) * std::sin(theta / 2);
  Eigen::Matrix2cd v;
  v << u, w, -std::conj(w), u;

  Mat b = pair_basis_matrix(v, d);
  const double q = 1 - eta_d;
  Vec w_plus(d * d), w_minus(d * d), w_zero(d * d);
  for (int kp = 0; kp < d; ++kp)
    for (int km = 0; km < d; ++km) {
      double qp = std::pow(q, kp), qm = std::pow(q, km);
      w_plus(kp * d + km) = 1 - qp;
      w_minus(kp * d + km) = qp * (1 - qm);
      w_zero(kp * d + km) = qp * qm;
    }
  AlicePovm povm;
  povm.plus = b.adjoint() * w_plus.asDiagonal() * b;
  povm.minus = b.adjoint() * w_minus.asDiagonal() * b;
  // complement instead of b^dag w_zero b: on photon-number blocks past the
  // exact truncation b is only a contraction, and the silent outcome must
  // absorb the difference for the three elements to resolve the identity
  povm.indefinite = Mat::Identity(d * d, d * d) - povm.plus - povm.minus;
  return povm;
}

namespace {

// Everything the definite/indefinite analyzer statistics need, reduced to
// small tensors so direction searches cost a handful of flops per probe.
// Valid when the state holds at most two photons at the analyzer: the
// outcome weights on the n-photon sector are affine (n=1) or quadratic
// (n=2) polynomials in the analyzer direction.
struct AliceReduction {
  double p_def = 0;
  Eigen::Vector3d c = Eigen::Vector3d::Zero();   // two-photon constant term
  Eigen::Vector3d c0 = Eigen::Vector3d::Zero();  // indefinite-outcome term
  Eigen::Matrix3d v = Eigen::Matrix3d::Zero();   // linear in the direction
  std::array<Eigen::Matrix3d, 3> w;              // quadratic, per Bob axis

  double definite_correlator(const Eigen::Vector3d& a, const Eigen::Vector3d& b) const {
    double num = b.dot(c) + a.dot(v * b);
    for (int j = 0; j < 3; ++j) num += b(j) * a.dot(w[j] * a);
    return num / p_def;
  }
  double assigned_correlator(const Eigen::Vector3d& a, const Eigen::Vector3d& b) const {
    double num = b.dot(c + c0) + a.dot(v * b);
    for (int j = 0; j < 3; ++j) num += b(j) * a.dot(w[j] * a);
    return num;
  }
};

AliceReduction reduce_alice(const DensityOperator& rho, const AliceAnalyzer& alice,
                            const std::string& bob_spin) {
  const std::string mr = alice.location + ".R", ml = alice.location + ".L";
  DensityOperator r3 = partial_trace(rho, {mr, ml, bob_spin});
  if (std::abs(r3.trace_real() - 1) > 1e-8)
    throw std::invalid_argument("analyzer statistics require a normalized state");
  const int d = r3.dim_of(mr);
  if (r3.dim_of(ml) != d)
    throw std::invalid_argument("analyzer requires equal dims on both modes");
  const int dd = d * d;

  // rho_j = Tr_spin[(1 (x) sigma_j) rho] on the pair space.
  std::array<Mat, 4> rho_j;
  for (int j = 0; j < 4; ++j) {
    Mat s = pauli(j);
    Mat out = Mat::Zero(dd, dd);
    for (int p = 0; p < dd; ++p)
      for (int pp = 0; pp < dd; ++pp) {
        Cplx acc = 0;
        for (int s1 = 0; s1 < 2; ++s1)
          for (int s2 = 0; s2 < 2; ++s2) acc += s(s1, s2) * r3.mat()(p * 2 + s2, pp * 2 + s1);
        out(p, pp) = acc;
      }
    rho_j[j] = std::move(out);
  }

  std::vector<int> total(dd);
  for (int n1 = 0; n1 < d; ++n1)
    for (int n2 = 0; n2 < d; ++n2) total[n1 * d + n2] = n1 + n2;
  double bad = 0;
  for (int p = 0; p < dd; ++p)
    if (total[p] >= 3 || total[p] > d - 1) bad += std::abs(rho_j[0](p, p).real());
  if (bad > 1e-9)
    throw std::invalid_argument(
        "analyzer statistics support at most two photons in the exact truncation");

  // Angular-momentum generators on the pair space (the n-photon sector
  // carries the spin-n/2 representation; on one photon a.K = a.sigma/2,
  // on two photons a.K is the m in {-1,0,1} ladder along a).
  Mat ad = Mat::Zero(d, d);
  for (int n = 1; n < d; ++n) ad(n, n - 1) = std::sqrt(double(n));
  Mat id = Mat::Identity(d, d);
  Mat a1d2 = kron(ad, id) * kron(id, ad.adjoint());
  Mat a2d1 = kron(id, ad) * kron(ad.adjoint(), id);
  std::array<Mat, 3> k;
  k[0] = (a1d2 + a2d1) / 2;
  k[1] = (Cplx(0, -1) * a1d2 + Cplx(0, 1) * a2d1) / 2;
  k[2] = (kron(ad * ad.adjoint(), id) - kron(id, ad * ad.adjoint())) / 2;

  auto project = [&](const Mat& m, int sector) {
    Mat out = Mat::Zero(dd, dd);
    for (int p = 0; p < dd; ++p)
      for (int pp = 0; pp < dd; ++pp)
        if (total[p] == sector && total[pp] == sector) out(p, pp) = m(p, pp);
    return out;
  };

  const double eta = alice.eta_d, q = 1 - eta;

  // Definite-minus-indefinite weight on sector n with k photons in the +
  // port is 1 - 2q^k + q^n: zero on vacuum, eta*(a.sigma) on one photon,
  // eta^2 + (1-q^2)*(a.K) - eta^2*(a.K)^2 on two.
  std::array<Mat, 3> gamma_lin;
  for (int i = 0; i < 3; ++i)
    gamma_lin[i] = 2 * eta * project(k[i], 1) + (1 - q * q) * project(k[i], 2);
  Mat gamma_const = Mat::Zero(dd, dd);
  for (int p = 0; p < dd; ++p)
    if (total[p] == 2) gamma_const(p, p) = eta * eta;
  std::array<std::array<Mat, 3>, 3> gamma_quad;
  for (int i = 0; i < 3; ++i)
    for (int l = 0; l < 3; ++l)
      gamma_quad[i][l] = -eta * eta * project((k[i] * k[l] + k[l] * k[i]) / 2, 2);

  AliceReduction red;
  double p0 = 0;
  for (int p = 0; p < dd; ++p) p0 += std::pow(q, double(total[p])) * rho_j[0](p, p).real();
  red.p_def = 1 - p0;
  for (int j = 0; j < 3; ++j) {
    red.c(j) = (gamma_const * rho_j[j + 1]).trace().real();
    double c0 = 0;
    for (int p = 0; p < dd; ++p)
      c0 += std::pow(q, double(total[p])) * rho_j[j + 1](p, p).real();
    red.c0(j) = c0;
    for (int i = 0; i < 3; ++i) red.v(i, j) = (gamma_lin[i] * rho_j[j + 1]).trace().real();
    for (int i = 0; i < 3; ++i)
      for (int l = 0; l < 3; ++l)
        red.w[j](i, l) = (gamma_quad[i][l] * rho_j[j + 1]).trace().real();
  }
  return red;
}

Eigen::Vector3d safe_unit(const Eigen::Vector3d& v) {
  double n = v.norm();
  return n < 1e-15 ? Eigen::Vector3d(0, 0, 1) : Eigen::Vector3d(v / n);
}

struct Candidate {
  double value = 0;
  std::array<int, 4> key{};
};

// Keeps the list sorted by (value desc, key asc); grid enumeration order
// plus exact comparisons make the selection deterministic.
void consider(std::vector<Candidate>& top, size_t cap, double value,
              const std::array<int, 4>& key) {
  auto pos = std::find_if(top.begin(), top.end(), [&](const Candidate& c) {
    return value > c.value || (value == c.value && key < c.key);
  });
  if (pos == top.end() && top.size() >= cap) return;
  top.insert(pos, Candidate{value, key});
  if (top.size() > cap) top.pop_back();
}

// Best strict improvement among single-coordinate probes, halving the step
// until it falls below tol.
template <typename F>
double compass_refine(std::vector<double>& angles, double start_value, double step, double tol,
                      const F& f) {
  double best = start_value;
  int guard = 0;
  while (step > tol && ++guard < 100000) {
    int best_i = -1;
    double best_delta = 0, best_val = best;
    for (size_t i = 0; i < angles.size(); ++i)
      for (double sgn : {1.0, -1.0}) {
        angles[i] += sgn * step;
        double val = f(angles);
        angles[i] -= sgn * step;
        if (val > best_val + 1e-15) {
          best_val = val;
          best_i = static_cast<int>(i);
          best_delta = sgn * step;
        }
      }
    if (best_i < 0) {
      step /= 2;
    } else {
      angles[static_cast<size_t>(best_i)] += best_delta;
      best = best_val;
    }
  }
  return best;
}

}  // namespace

ChshPovmResult chsh_povm(const DensityOperator& rho, const AliceAnalyzer& alice,
                         const std::string& bob_spin, const PovmSearchOptions& opt) {
  AliceReduction red = reduce_alice(rho, alice, bob_spin);
  if (red.p_def < 1e-15)
    throw std::domain_error("zero definite-event probability at the analyzer");

  const int nt = opt.grid_theta, np = opt.grid_phi;
  std::vector<Eigen::Vector3d> grid(nt * np);
  for (int it = 0; it < nt; ++it)
    for (int ip = 0; ip < np; ++ip)
      grid[it * np + ip] = unit_from_angles(M_PI * (it + 0.5) / nt, 2 * M_PI * ip / np);

  // Affine seeding: with the quadratic terms dropped, the optimal analyzer
  // directions for fixed (b0, b1) are the normalized images under V.
  std::vector<Candidate> top;
  for (int i0 = 0; i0 < nt * np; ++i0)
    for (int i1 = 0; i1 < nt * np; ++i1) {
      const Eigen::Vector3d &b0 = grid[i0], &b1 = grid[i1];
      double val = 2 * red.c.dot(b0) + (red.v * (b0 + b1)).norm() + (red.v * (b0 - b1)).norm();
      consider(top, 8, val, {i0, i1, 0, 0});
    }

  auto chsh_of = [&](const std::vector<double>& ang) {
    Eigen::Vector3d a0 = unit_from_angles(ang[0], ang[1]), a1 = unit_from_angles(ang[2], ang[3]);
    Eigen::Vector3d b0 = unit_from_angles(ang[4], ang[5]), b1 = unit_from_angles(ang[6], ang[7]);
    return red.definite_correlator(a0, b0) + red.definite_correlator(a0, b1) +
           red.definite_correlator(a1, b0) - red.definite_correlator(a1, b1);
  };

  double best = -1e300;
  std::vector<double> best_angles;
  for (const auto& cand : top) {
    const Eigen::Vector3d &b0 = grid[cand.key[0]], &b1 = grid[cand.key[1]];
    Eigen::Vector3d a0 = safe_unit(red.v * (b0 + b1));
    Eigen::Vector3d a1 = safe_unit(red.v * (b0 - b1));
    std::vector<double> ang(8);
    std::tie(ang[0], ang[1]) = angles_from_unit(a0);
    std::tie(ang[2], ang[3]) = angles_from_unit(a1);
    std::tie(ang[4], ang[5]) = angles_from_unit(b0);
    std::tie(ang[6], ang[7]) = angles_from_unit(b1);
    double val = compass_refine(ang, chsh_of(ang), opt.refine_step, opt.refine_tol, chsh_of);
    if (val > best + 1e-15) {
      best = val;
      best_angles = ang;
    }
  }
  if (best_angles.empty()) throw std::runtime_error("CHSH search failed to produce settings");

  ChshPovmResult res;
  res.S = best;
  res.p_definite = red.p_def;
  res.settings.a0 = unit_from_angles(best_angles[0], best_angles[1]);
  res.settings.a1 = unit_from_angles(best_angles[2], best_angles[3]);
  res.settings.b0 = unit_from_angles(best_angles[4], best_angles[5]);
  res.settings.b1 = unit_from_angles(best_angles[6], best_angles[7]);
  return res;
}

double qber_povm(const DensityOperator& rho, const AliceAnalyzer& alice,
                 const std::string& bob_spin, NoclickMode mode, const PovmSearchOptions& opt) {
  AliceReduction red = reduce_alice(rho, alice, bob_spin);
  if (red.p_def < 1e-15)
    throw std::domain_error("zero definite-event probability at the analyzer");

  const Eigen::Vector3d c_eff =
      mode == NoclickMode::assign_plus ? Eigen::Vector3d(red.c + red.c0) : red.c;
  const double denom = mode == NoclickMode::assign_plus ? 1.0 : red.p_def;

  // Grid enumeration runs in lexicographic order, so requiring a strict
  // improvement keeps the lexicographically smallest near-tied seed.
  const int nt = opt.grid_theta, np = opt.grid_phi;
  double seed_best = -1e300;
  Eigen::Vector3d b_seed(0, 0, 1);
  for (int it = 0; it < nt; ++it)
    for (int ip = 0; ip < np; ++ip) {
      Eigen::Vector3d b = unit_from_angles(M_PI * (it + 0.5) / nt, 2 * M_PI * ip / np);
      double val = (b.dot(c_eff) + (red.v * b).norm()) / denom;
      if (val > seed_best + 1e-12) {
        seed_best = val;
        b_seed = b;
      }
    }
  Eigen::Vector3d a_seed = safe_unit(red.v * b_seed);

  auto value_of = [&](const std::vector<double>& ang) {
    Eigen::Vector3d a = unit_from_angles(ang[0], ang[1]), b = unit_from_angles(ang[2], ang[3]);
    return mode == NoclickMode::assign_plus ? red.assigned_correlator(a, b)
                                            : red.definite_correlator(a, b);
  };
  std::vector<double> ang(4);
  std::tie(ang[0], ang[1]) = angles_from_unit(a_seed);
  std::tie(ang[2], ang[3]) = angles_from_unit(b_seed);
  double e = compass_refine(ang, value_of(ang), opt.refine_step, opt.refine_tol, value_of);
  return std::clamp((1 - e) / 2, 0.0, 1.0);
}

double noclick_ratio(const DensityOperator& rho, const AliceAnalyzer& alice) {
  const std::string mr = alice.location + ".R", ml = alice.location + ".L";
  DensityOperator pair = partial_trace(rho, {mr, ml});
  if (std::abs(pair.trace_real() - 1) > 1e-8)
    throw std::invalid_argument("analyzer statistics require a normalized state");
  const int d = pair.dim_of(mr);
  const double q = 1 - alice.eta_d;
  double p0 = 0;
  for (int n1 = 0; n1 < d; ++n1)
    for (int n2 = 0; n2 < d; ++n2)
      p0 += std::pow(q, double(n1 + n2)) * pair.mat()(n1 * d + n2, n1 * d + n2).real();
  double p_def = 1 - p0;
  if (p_def < 1e-15)
    throw std::domain_error("zero definite-event probability at the analyzer");
  return (1 - p_def) / p_def;
}

}  // namespace diqkd
