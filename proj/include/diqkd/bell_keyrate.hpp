#pragma once

#include <array>
#include <string>

#include "diqkd/numkernel.hpp"

namespace diqkd {

// Two qubits with labels in a fixed (A, B) order; validated on construction.
struct TwoQubitState {
  DensityOperator rho;

  static TwoQubitState from(const DensityOperator& rho);
  Eigen::Vector3d bloch_a() const;
  Eigen::Vector3d bloch_b() const;
};

// T_ij = Tr[rho s_i (x) s_j], i,j over x,y,z.
Eigen::Matrix3d correlation_matrix(const TwoQubitState& s);

// Maximal CHSH value of a two-qubit state: 2*sqrt(u1+u2) from the two
// largest eigenvalues of T^T T.
double chsh_horodecki(const Eigen::Matrix3d& t);

// Minimal disagreement probability over aligned projective measurements:
// (1 - s1)/2 with s1 the largest singular value of T.
double qber_min(const Eigen::Matrix3d& t);

double binary_entropy(double x);

// Collective-attack key-rate factor
//   R = 1 - h(Q) - [(1-mu)*chi((S-4mu)/(1-mu)) + mu]
// with chi(s) = h((1+sqrt((s/2)^2-1))/2), clamped to 1 for s <= 2 (no
// constraint below the classical bound) and to 0 at the Tsirelson bound.
// May be negative.  Requires mu in [0,1), Q in [0,1], S in [0, 2*sqrt2].
double keyrate_factor(double mu, double Q, double S);

// ---- Alice-side photonic measurement (three outcomes: +, -, no-click) ----

struct AliceAnalyzer {
  std::string location;  // modes <location>.R / <location>.L
  double eta_d = 1;      // detector efficiency behind each analyzer port
};

// POVM elements on the two-mode pair space (Fock dim d per mode) for a
// polarization analyzer along Bloch direction a, threshold detectors of
// efficiency eta_d on both output ports.  Outcome rule: any click on the
// + port (double clicks included) -> plus; click on - port only -> minus;
// no click -> indefinite.
struct AlicePovm {
  Mat plus, minus, indefinite;
};
AlicePovm alice_povm(const Eigen::Vector3d& direction, int d, double eta_d);

struct BellSettings {
  Eigen::Vector3d a0, a1, b0, b1;
};

struct ChshPovmResult {
  double S = 0;          // CHSH over definite-outcome events
  BellSettings settings;
  double p_definite = 0;
};

struct PovmSearchOptions {
  int grid_theta = 12;
  int grid_phi = 24;
  double refine_step = 0.3;
  double refine_tol = 1e-8;
};

// Maximizes the CHSH combination over Alice analyzer directions (closed-form
// inner step on the grid) and Bob Bloch directions (grid + derivative-free
// refinement).  Each correlator conditions on Alice's definite outcomes.
// rho must carry modes <location>.R/.L and the named spin.
ChshPovmResult chsh_povm(const DensityOperator& rho, const AliceAnalyzer& alice,
                         const std::string& bob_spin, const PovmSearchOptions& opt = {});

enum class NoclickMode { assign_plus, discard };

// Key-basis error probability, minimized over the shared measurement
// direction.  assign_plus: no-clicks enter the key as "+".  discard:
// error among definite events only.
double qber_povm(const DensityOperator& rho, const AliceAnalyzer& alice,
                 const std::string& bob_spin, NoclickMode mode,
                 const PovmSearchOptions& opt = {});

// mu = P(no-click) / P(definite); direction independent.
double noclick_ratio(const DensityOperator& rho, const AliceAnalyzer& alice);

}  // namespace diqkd
