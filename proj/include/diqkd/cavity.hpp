#pragma once

#include <string>
#include <utility>
#include <vector>

#include "diqkd/numkernel.hpp"

namespace diqkd {

// Single-sided cavity with one spin, operated at the reflection point where
// the bare and spin-coupled responses differ only in magnitude.  Everything
// downstream depends on the rates through kappa/kappa_s alone.
class CavityParams {
 public:
  static CavityParams from_ratio(double kappa_over_kappa_s);
  // Rates in one consistent energy unit; requires the operating-point
  // condition g^2 = gamma*(kappa + kappa_s)/4 to hold within 1%.
  static CavityParams from_rates(double g, double gamma, double kappa, double kappa_s);

  double kappa_ratio() const { return ratio_; }

 private:
  explicit CavityParams(double ratio) : ratio_(ratio) {}
  double ratio_;
};

// (r_c, r_d): reflection amplitudes for the spin-coupled and decoupled
// polarization, r_c = |1-k|/(1+k), r_d = 1/(1+k) with k = kappa/kappa_s.
std::pair<double, double> reflection_coefficients(const CavityParams& c);

// Spin-dependent reflection off the cavity at `location`: the R mode sees
// amplitude r_d for spin up and r_c for spin down, the L mode the reverse.
// Unreflected amplitude is scattered (a loss channel per mode), so the map
// is trace preserving.
DensityOperator spin_reflection(const DensityOperator& rho, const std::string& location,
                                const std::string& spin, const CavityParams& c);

enum class Variant { symmetric, asymmetric };

struct HeraldBranch {
  std::string pattern;     // detector signature, e.g. "H" or "HV"
  double probability;      // per emitted pair, unit-efficiency detection, no fiber loss
  DensityOperator state;   // normalized conditional state (empty if probability is 0)
};

// Closed-form single-pair herald branches before any phase correction.
// Asymmetric: state on modes A.R/A.L (capacity 1) and spin sB.
// Symmetric: state on spins sA, sB.
std::vector<HeraldBranch> analytic_heralded(Variant variant, const CavityParams& c);

}  // namespace diqkd
