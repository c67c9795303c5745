#include "diqkd/cavity.hpp"

#include <cmath>
#include <stdexcept>

#include "diqkd/photonics.hpp"

namespace diqkd {

CavityParams CavityParams::from_ratio(double kappa_over_kappa_s) {
  if (!(kappa_over_kappa_s >= 0) || !std::isfinite(kappa_over_kappa_s))
    throw std::invalid_argument("kappa ratio must be finite and non-negative");
  return CavityParams(kappa_over_kappa_s);
}

CavityParams CavityParams::from_rates(double g, double gamma, double kappa, double kappa_s) {
  if (!(g > 0 && gamma > 0 && kappa > 0 && kappa_s > 0))
    throw std::invalid_argument("cavity rates must be positive");
  double lhs = g * g;
  double rhs = gamma * (kappa + kappa_s) / 4.0;
  if (std::abs(lhs - rhs) > 0.01 * rhs)
    throw std::invalid_argument("rates violate the operating point g^2 = gamma*(kappa+kappa_s)/4");
  return CavityParams(kappa / kappa_s);
}

std::pair<double, double> reflection_coefficients(const CavityParams& c) {
  double k = c.kappa_ratio();
  return {std::abs(1 - k) / (1 + k), 1 / (1 + k)};
}

DensityOperator spin_reflection(const DensityOperator& rho, const std::string& location,
                                const std::string& spin, const CavityParams& c) {
  auto [r_c, r_d] = reflection_coefficients(c);
  const std::string mr = location + ".R", ml = location + ".L";
  const int d = rho.dim_of(mr);
  if (rho.dim_of(ml) != d)
    throw std::invalid_argument("spin_reflection requires equal dims on both modes");

  // Reflection amplitude r keeps each photon with probability r^2.
  auto kr_up = loss_kraus_set(d, r_d * r_d);    // R mode, spin up
  auto kr_dn = loss_kraus_set(d, r_c * r_c);    // R mode, spin down
  auto kl_up = kr_dn;                           // L mode mirrors the R assignment
  auto kl_dn = kr_up;

  Mat p_up = Mat::Zero(2, 2), p_dn = Mat::Zero(2, 2);
  p_up(0, 0) = 1;
  p_dn(1, 1) = 1;

  std::vector<Mat> kraus;
  for (int kr = 0; kr < d; ++kr)
    for (int kl = 0; kl < d; ++kl)
      kraus.push_back(kron(kr_up[kr], kron(kl_up[kl], p_up)) +
                      kron(kr_dn[kr], kron(kl_dn[kl], p_dn)));
  return apply_kraus(rho, {mr, ml, spin}, kraus);
}

namespace {

// Spin pair kets on (local qubit, remote qubit); 0 = up.
Vec bell_phi(double sign) {
  Vec v = Vec::Zero(4);
  v(0) = 1 / std::sqrt(2.0);
  v(3) = sign / std::sqrt(2.0);
  return v;
}
Vec bell_psi(double sign) {
  Vec v = Vec::Zero(4);
  v(1) = 1 / std::sqrt(2.0);
  v(2) = sign / std::sqrt(2.0);
  return v;
}

HeraldBranch make_branch(std::string pattern, double prob, std::vector<Subsystem> systems,
                         const Vec& unnormalized) {
  HeraldBranch b{std::move(pattern), prob, {}};
  double n2 = unnormalized.squaredNorm();
  if (n2 > 1e-300)
    b.state = DensityOperator::from_pure(std::move(systems), unnormalized / std::sqrt(n2));
  return b;
}

}  // namespace

std::vector<HeraldBranch> analytic_heralded(Variant variant, const CavityParams& c) {
  auto [r_c, r_d] = reflection_coefficients(c);
  const Cplx i(0, 1);

  if (variant == Variant::asymmetric) {
    // Photon-spin kets on (A photon as qubit R=0/L=1, sB); the photon qubit
    // is embedded in two capacity-1 modes A.R, A.L.
    std::vector<Subsystem> systems{{"A.R", 2}, {"A.L", 2}, {"sB", 2}};
    auto embed = [](const Vec& qubit_pair) {
      // (photon qubit, spin) -> (A.R occ, A.L occ, spin)
      Vec v = Vec::Zero(8);
      v(4 + 0) = qubit_pair(0);  // |R> = occ (1,0)
      v(4 + 1) = qubit_pair(1);
      v(2 + 0) = qubit_pair(2);  // |L> = occ (0,1)
      v(2 + 1) = qubit_pair(3);
      return v;
    };
    double p = (r_c * r_c + r_d * r_d) / 4;
    Vec h = embed(r_c * bell_psi(1) + r_d * bell_phi(1));
    Vec v = embed(i * (r_c * bell_psi(-1) + r_d * bell_phi(-1)));
    return {make_branch("H", p, systems, h), make_branch("V", p, systems, v)};
  }

  std::vector<Subsystem> systems{{"sA", 2}, {"sB", 2}};
  const double a = r_c * r_c + r_d * r_d;
  const double cross = 2 * r_c * r_d;
  const double diff = r_c * r_c - r_d * r_d;
  double p_same = (a * a + cross * cross) / 16;
  double p_diff = diff * diff / 16;

  Vec same = a * bell_phi(1) + cross * bell_psi(1);
  Vec md = -i * diff * bell_phi(-1);
  return {make_branch("HH", p_same, systems, same), make_branch("HV", p_diff, systems, md),
          make_branch("VH", p_diff, systems, md), make_branch("VV", p_same, systems, -same)};
}

}  // namespace diqkd
