#pragma once

#include <map>
#include <string>
#include <vector>

#include "diqkd/numkernel.hpp"

namespace diqkd {

// Bosonic modes identified by "<location>.<R|L>" (circular polarization) or
// "<location>.<H|V>" after a linear basis change.  Every mode shares one Fock
// truncation: capacity photons per mode, so local dim = capacity + 1.
struct ModeRegister {
  std::vector<std::string> modes;
  int capacity = 2;

  int index_of(const std::string& mode) const;
  int fock_dim() const { return capacity + 1; }
};

// Sparse ket over mode occupations and optional spin qubits.  Key layout:
// one occupation per mode (register order), then one 0/1 digit per spin,
// with 0 = spin up.
class PhotonicState {
 public:
  PhotonicState(ModeRegister reg, std::vector<std::string> spins = {});

  const ModeRegister& reg() const { return reg_; }
  const std::vector<std::string>& spins() const { return spins_; }
  const std::map<std::vector<int>, Cplx>& amps() const { return amps_; }

  void add(const std::vector<int>& key, Cplx amp);
  double norm2() const;
  PhotonicState normalized() const;

 private:
  void check_key(const std::vector<int>& key) const;

  ModeRegister reg_;
  std::vector<std::string> spins_;
  std::map<std::vector<int>, Cplx> amps_;
};

struct SourceParams {
  double p = 0.01;  // pair-emission probability per use
  int order = 2;    // highest retained photon-pair number (1 or 2)
};

// Two-mode-squeezed polarization-entangled pair source, truncated at
// `order` pairs and renormalized.  Emits into locations a and b.
PhotonicState spdc_state(const SourceParams& src, const std::string& a, const std::string& b);

// Tensors (|up> + |down>)/sqrt(2) for each listed spin.
PhotonicState with_spins(const PhotonicState& state, const std::vector<std::string>& spins);

DensityOperator densify(const PhotonicState& state);

// Photon-loss Kraus set on one mode of Fock dim d; eta is the survival
// probability.  k-th operator removes k photons.
std::vector<Mat> loss_kraus_set(int d, double eta);

// Independent loss with survival probability eta on each listed mode.
DensityOperator loss_channel(const DensityOperator& rho, const std::vector<std::string>& modes,
                             double eta);

// Matrix of the two-mode basis change c_i^dag = sum_m v(i,m) a_m^dag on the
// truncated pair space (d per mode, row-major).  v must be unitary; the
// result is unitary on every complete total-photon block (total <= d-1).
Mat pair_basis_matrix(const Eigen::Matrix2cd& v, int d);

// Rewrites location.R/.L into location.H/.V via H = (R+L)/sqrt2,
// V = -i(R-L)/sqrt2.  Requires all support within total <= d-1 photons at
// the location, where the truncation is exact.
DensityOperator to_linear_basis(const DensityOperator& rho, const std::string& location);

struct DetectResult {
  double p_click = 0;
  double p_noclick = 0;
  DensityOperator click;    // conditional, normalized, mode removed
  DensityOperator noclick;  // conditional, normalized, mode removed
};

// Destructive threshold detector with efficiency eta on one mode:
// click weight 1-(1-eta)^n on n photons.
DetectResult threshold_detect(const DensityOperator& rho, const std::string& mode, double eta);

double binomial(int n, int k);

}  // namespace diqkd
