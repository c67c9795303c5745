#pragma once

#include <string>

#include "diqkd/numkernel.hpp"

namespace diqkd {

struct TimingParams {
  double t_m = 1e-5;      // spin readout time, seconds
  double tau = 1e-3;      // spin coherence time, seconds
  double L = 0;           // party separation, km
  double c_signal = 2e5;  // heralding-signal velocity, km/s
};

enum class Strategy { communication_free, adaptive, auto_select };

// Isotropic depolarization of one spin: rho -> sum_i g_i s_i rho s_i with
// g_0 = (1+3e^{-t/tau})/4 and g_{x,y,z} = (1-e^{-t/tau})/4.
DensityOperator depolarize(const DensityOperator& rho, const std::string& spin,
                           double t_over_tau);

// Pi phase shift (sigma_z conjugation) on one spin; undoes the sign flip a
// V-polarized herald imprints, so no partner communication is needed.
DensityOperator phase_correct(const DensityOperator& rho, const std::string& spin);

// How long a spin decoheres before measurement.  communication_free: the
// local readout time alone.  adaptive: readout plus one herald transit
// across the full separation (both parties wait for the other's outcome).
double decoherence_time(Strategy strategy, const TimingParams& t);

}  // namespace diqkd
