#include "diqkd/spin_noise.hpp"

#include <cmath>
#include <stdexcept>

namespace diqkd {

namespace {

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

}  // namespace

DensityOperator depolarize(const DensityOperator& rho, const std::string& spin,
                           double t_over_tau) {
  if (!(t_over_tau >= 0)) throw std::invalid_argument("t_over_tau must be non-negative");
  if (rho.dim_of(spin) != 2) throw std::invalid_argument("'" + spin + "' is not a qubit");
  double e = std::exp(-t_over_tau);
  double g0 = (1 + 3 * e) / 4, gi = (1 - e) / 4;
  std::vector<Mat> kraus;
  kraus.push_back(std::sqrt(g0) * pauli(0));
  for (int i = 1; i < 4; ++i) kraus.push_back(std::sqrt(gi) * pauli(i));
  return apply_kraus(rho, {spin}, kraus);
}

DensityOperator phase_correct(const DensityOperator& rho, const std::string& spin) {
  if (rho.dim_of(spin) != 2) throw std::invalid_argument("'" + spin + "' is not a qubit");
  return apply_unitary(rho, {spin}, pauli(3));
}

double decoherence_time(Strategy strategy, const TimingParams& t) {
  if (!(t.t_m >= 0 && t.tau > 0 && t.c_signal > 0 && t.L >= 0))
    throw std::invalid_argument("timing parameters out of range (tau, c_signal > 0; t_m, L >= 0)");
  switch (strategy) {
    case Strategy::communication_free: return t.t_m;
    case Strategy::adaptive: return t.t_m + t.L / t.c_signal;
    default: throw std::invalid_argument("decoherence_time requires a concrete strategy");
  }
}

}  // namespace diqkd
