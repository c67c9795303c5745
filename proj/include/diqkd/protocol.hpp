#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "diqkd/bell_keyrate.hpp"
#include "diqkd/cavity.hpp"
#include "diqkd/photonics.hpp"
#include "diqkd/spin_noise.hpp"

namespace diqkd {

struct ProtocolConfig {
  Variant variant = Variant::symmetric;
  Strategy strategy = Strategy::auto_select;
  CavityParams cavity = CavityParams::from_ratio(13);
  SourceParams source;   // source.p is used only when p_auto is false
  bool p_auto = true;
  double L = 0;          // party separation, km
  double L_att = 22;     // fiber attenuation length, km
  double eta_her = 1;    // heralding-detector efficiency
  double eta_d = 1;      // direct photon-measurement efficiency (asymmetric)
  TimingParams timing;   // timing.L is overridden by L during evaluation
  double rep_rate = 1e8; // source repetition rate, Hz
  NoclickMode noclick = NoclickMode::assign_plus;
};

struct HeraldRecord {
  std::string pattern;
  double probability;      // per source use
  DensityOperator state;   // normalized conditional, after correction and noise
};

struct KeyRateResult {
  double S = 0;
  double Q = 0;
  double mu = 0;
  double R = 0;            // key-rate factor; negative means no extractable key
  double p_herald = 0;     // herald success per source use
  double p_success = 0;    // p_herald, times the definite fraction when no-clicks are discarded
  double key_per_use = 0;  // p_success * max(R, 0)
  double key_per_second = 0;
  double p = 0;            // source strength used
  Strategy strategy = Strategy::communication_free;  // resolved
  bool degenerate = false;
  std::string note;
};

// Per-photon fiber survival: the symmetric source sits midway (each photon
// travels L/2), the asymmetric source sits at Alice (one photon travels L).
double transmissivity(Variant variant, double L, double L_att);

std::vector<HeraldRecord> herald_records(const ProtocolConfig& cfg, Strategy strategy);

// Full pipeline at the configured fixed p (rejects p_auto configs).
KeyRateResult run_protocol(const ProtocolConfig& cfg);

// Maximizes key_per_use over p in [1e-6, 0.2]: log grid of >= 40 points,
// then golden-section refinement to 1e-3 relative.
std::pair<double, KeyRateResult> optimize_p(const ProtocolConfig& cfg);

Strategy select_strategy(const ProtocolConfig& cfg);

// Shared engine: the heralded-state construction depends on p but not on
// timing or strategy, so p-optimization, strategy comparison, and sweeps
// over t/tau reuse cached stages.
class Evaluator {
 public:
  explicit Evaluator(ProtocolConfig cfg);

  const ProtocolConfig& config() const { return cfg_; }

  // Concrete strategy only (auto_select is resolved by the callers below).
  KeyRateResult evaluate(double p, Strategy strategy, const TimingParams& timing);
  // Resolves the configured strategy (auto: best of both, ties to
  // communication-free) at the configured timing.
  KeyRateResult evaluate_resolved(double p);
  std::pair<double, KeyRateResult> optimize();
  // True if any p on the optimizer grid yields a positive rate at the given
  // timing; scans in ascending p and stops at the first hit.
  bool positive_rate(const TimingParams& timing);

  static std::vector<double> p_grid();

 private:
  struct Stage {
    // Unnormalized post-correction conditional operators, keyed by pattern;
    // traces are herald probabilities per source use.
    std::vector<std::pair<std::string, DensityOperator>> branches;
    double p_herald = 0;
  };
  const Stage& stage(double p);

  ProtocolConfig cfg_;
  std::map<double, Stage> cache_;
};

}  // namespace diqkd
