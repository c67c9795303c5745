#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "diqkd/protocol.hpp"

namespace diqkd {

struct SweepSpec {
  std::string param;  // L, t_over_tau, kappa_ratio, eta_her, eta_d, p
  double from = 0;
  double to = 0;
  int steps = 0;
  bool log_scale = false;

  void validate() const;            // throws invalid_argument naming the field
  std::vector<double> values() const;
};

// Writes `value` into the config field named by `param`.
void apply_param(ProtocolConfig& cfg, const std::string& param, double value);

std::string csv_header();
std::string csv_row(const ProtocolConfig& cfg, const KeyRateResult& r);
std::string format_sig12(double x);

// optimize_p when cfg.p_auto, run_protocol otherwise.
KeyRateResult evaluate_point(const ProtocolConfig& cfg);

void run_sweep(const ProtocolConfig& cfg, const SweepSpec& spec, int jobs, std::ostream& out);
void run_grid(const ProtocolConfig& cfg, const SweepSpec& x, const SweepSpec& y, int jobs,
              std::ostream& out);

// For each kappa ratio, bisects t_m/tau in [1e-6, 10] (to 1e-3 relative) for
// the largest value still yielding a positive optimized key rate; emits
// "kappa_ratio,t_over_tau_max" rows, the second field empty when no positive
// rate exists anywhere on the interval.
void run_boundary(const ProtocolConfig& cfg, const SweepSpec& kappa, int jobs, std::ostream& out);

// Largest t_m/tau with a positive rate, or negative if none.
double boundary_t_over_tau(const ProtocolConfig& cfg, double kappa_ratio);

}  // namespace diqkd
