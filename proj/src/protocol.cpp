#include "diqkd/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace diqkd {

namespace {

const double kSqrt8 = 2 * std::sqrt(2.0);

// Unnormalized conditional after a threshold detector fires (or stays
// silent) on one mode; the mode is consumed.
DensityOperator detect_branch(const DensityOperator& rho, const std::string& mode, double eta,
                              bool click) {
  const int d = rho.dim_of(mode);
  std::vector<double> w(d);
  for (int n = 0; n < d; ++n) {
    double miss = std::pow(1 - eta, n);
    w[n] = click ? 1 - miss : miss;
  }
  return weighted_block_trace(rho, mode, w);
}

// Exactly-one-click herald at a site's H/V detector pair; double clicks and
// silence are herald failures and fall outside these branches.
DensityOperator herald_site(const DensityOperator& rho, const std::string& location, double eta,
                            char outcome) {
  const std::string h = location + ".H", v = location + ".V";
  if (outcome == 'H') return detect_branch(detect_branch(rho, h, eta, true), v, eta, false);
  return detect_branch(detect_branch(rho, h, eta, false), v, eta, true);
}

Strategy resolve_concrete(const ProtocolConfig& cfg, Strategy s) {
  // The asymmetric herald is local to Bob and the corrected state is
  // pattern independent, so no waiting strategy applies.
  if (cfg.variant == Variant::asymmetric) return Strategy::communication_free;
  return s;
}

void validate(const ProtocolConfig& cfg) {
  if (!(cfg.eta_her >= 0 && cfg.eta_her <= 1))
    throw std::invalid_argument("eta_her outside [0,1]");
  if (!(cfg.eta_d >= 0 && cfg.eta_d <= 1)) throw std::invalid_argument("eta_d outside [0,1]");
  if (cfg.L < 0) throw std::invalid_argument("L must be non-negative");
  if (!(cfg.L_att > 0)) throw std::invalid_argument("L_att must be positive");
  if (!(cfg.rep_rate > 0)) throw std::invalid_argument("rep_rate must be positive");
}

std::vector<std::pair<std::string, DensityOperator>> build_branches(const ProtocolConfig& cfg,
                                                                    double p) {
  SourceParams src{p, cfg.source.order};
  const double eta_t = transmissivity(cfg.variant, cfg.L, cfg.L_att);
  std::vector<std::pair<std::string, DensityOperator>> branches;

  if (cfg.variant == Variant::symmetric) {
    DensityOperator rho = densify(with_spins(spdc_state(src, "A", "B"), {"sA", "sB"}));
    rho = loss_channel(rho, {"A.R", "A.L", "B.R", "B.L"}, eta_t);
    rho = spin_reflection(rho, "A", "sA", cfg.cavity);
    rho = spin_reflection(rho, "B", "sB", cfg.cavity);
    rho = to_linear_basis(rho, "A");
    rho = to_linear_basis(rho, "B");
    for (const char* pattern : {"HH", "HV", "VH", "VV"}) {
      DensityOperator cond = herald_site(rho, "A", cfg.eta_her, pattern[0]);
      cond = herald_site(cond, "B", cfg.eta_her, pattern[1]);
      if (pattern[0] == 'V') cond = phase_correct(cond, "sA");
      if (pattern[1] == 'V') cond = phase_correct(cond, "sB");
      branches.emplace_back(pattern, std::move(cond));
    }
  } else {
    DensityOperator rho = densify(with_spins(spdc_state(src, "A", "B"), {"sB"}));
    rho = loss_channel(rho, {"B.R", "B.L"}, eta_t);
    rho = spin_reflection(rho, "B", "sB", cfg.cavity);
    rho = to_linear_basis(rho, "B");
    for (const char* pattern : {"H", "V"}) {
      DensityOperator cond = herald_site(rho, "B", cfg.eta_her, pattern[0]);
      if (pattern[0] == 'V') cond = phase_correct(cond, "sB");
      branches.emplace_back(pattern, std::move(cond));
    }
  }
  return branches;
}

DensityOperator add_noise(const ProtocolConfig& cfg, const DensityOperator& state,
                          double t_over_tau) {
  if (cfg.variant == Variant::symmetric)
    return depolarize(depolarize(state, "sA", t_over_tau), "sB", t_over_tau);
  return depolarize(state, "sB", t_over_tau);
}

double noise_ratio(const ProtocolConfig& cfg, Strategy strategy) {
  TimingParams t = cfg.timing;
  t.L = cfg.L;
  return decoherence_time(strategy, t) / t.tau;
}

}  // namespace

double transmissivity(Variant variant, double L, double L_att) {
  if (L < 0) throw std::invalid_argument("L must be non-negative");
  if (!(L_att > 0)) throw std::invalid_argument("L_att must be positive");
  double travelled = variant == Variant::symmetric ? L / 2 : L;
  return std::exp(-travelled / L_att);
}

Evaluator::Evaluator(ProtocolConfig cfg) : cfg_(std::move(cfg)) { validate(cfg_); }

const Evaluator::Stage& Evaluator::stage(double p) {
  auto it = cache_.find(p);
  if (it != cache_.end()) return it->second;

  Stage st;
  st.branches = build_branches(cfg_, p);
  for (const auto& [pattern, state] : st.branches) st.p_herald += state.trace_real();
  return cache_.emplace(p, std::move(st)).first->second;
}

KeyRateResult Evaluator::evaluate(double p, Strategy strategy, const TimingParams& timing) {
  strategy = resolve_concrete(cfg_, strategy);
  if (strategy == Strategy::auto_select)
    throw std::invalid_argument("evaluate requires a concrete strategy");

  KeyRateResult res;
  res.p = p;
  res.strategy = strategy;

  const Stage& st = stage(p);
  res.p_herald = st.p_herald;
  if (st.p_herald < 1e-300) {
    res.degenerate = true;
    res.note = "herald probability underflow";
    return res;
  }

  TimingParams t = timing;
  t.L = cfg_.L;
  const double t_over_tau = decoherence_time(strategy, t) / t.tau;

  if (cfg_.variant == Variant::symmetric) {
    if (strategy == Strategy::communication_free) {
      Mat sum = Mat::Zero(4, 4);
      for (const auto& [pattern, state] : st.branches)
        sum += depolarize(depolarize(state, "sA", t_over_tau), "sB", t_over_tau).mat();
      DensityOperator mix({{"sA", 2}, {"sB", 2}}, sum / st.p_herald);
      Eigen::Matrix3d tm = correlation_matrix(TwoQubitState::from(mix));
      res.S = chsh_horodecki(tm);
      res.Q = qber_min(tm);
      res.R = keyrate_factor(0, res.Q, std::min(res.S, kSqrt8));
    } else {
      double rbar = 0, sbar = 0, qbar = 0;
      for (const auto& [pattern, state] : st.branches) {
        double prob = state.trace_real();
        if (prob < 1e-300) continue;
        DensityOperator n = depolarize(depolarize(state, "sA", t_over_tau), "sB", t_over_tau);
        Eigen::Matrix3d tm = correlation_matrix(TwoQubitState::from(n.normalized()));
        double s = chsh_horodecki(tm), q = qber_min(tm);
        double w = prob / st.p_herald;
        rbar += w * keyrate_factor(0, q, std::min(s, kSqrt8));
        sbar += w * s;
        qbar += w * q;
      }
      res.S = sbar;
      res.Q = qbar;
      res.R = rbar;
    }
    res.mu = 0;
    res.p_success = st.p_herald;
  } else {
    Mat sum = Mat::Zero(st.branches.front().second.dim(), st.branches.front().second.dim());
    for (const auto& [pattern, state] : st.branches)
      sum += depolarize(state, "sB", t_over_tau).mat();
    DensityOperator mix(st.branches.front().second.systems(), sum / st.p_herald);

    AliceAnalyzer analyzer{"A", cfg_.eta_d};
    try {
      ChshPovmResult chsh = chsh_povm(mix, analyzer, "sB");
      res.S = std::clamp(chsh.S, 0.0, kSqrt8);
      res.mu = noclick_ratio(mix, analyzer);
      res.Q = qber_povm(mix, analyzer, "sB", cfg_.noclick);
      if (res.mu >= 1) {
        res.R = -1;
        res.note = "indefinite events dominate (mu >= 1)";
      } else {
        res.R = keyrate_factor(res.mu, res.Q, res.S);
      }
      res.p_success = cfg_.noclick == NoclickMode::discard ? st.p_herald * chsh.p_definite
                                                           : st.p_herald;
    } catch (const std::domain_error&) {
      res.R = -1;
      res.degenerate = true;
      res.note = "no definite events at the analyzer";
    }
  }

  res.key_per_use = res.p_success * std::max(res.R, 0.0);
  res.key_per_second = cfg_.rep_rate * res.key_per_use;
  return res;
}

KeyRateResult Evaluator::evaluate_resolved(double p) {
  Strategy s = resolve_concrete(cfg_, cfg_.strategy);
  if (s != Strategy::auto_select) return evaluate(p, s, cfg_.timing);
  KeyRateResult free_r = evaluate(p, Strategy::communication_free, cfg_.timing);
  KeyRateResult adap_r = evaluate(p, Strategy::adaptive, cfg_.timing);
  return adap_r.key_per_use > free_r.key_per_use ? adap_r : free_r;
}

std::vector<double> Evaluator::p_grid() {
  const double lo = 1e-6, hi = 0.2;
  const int n = 40;
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i)
    grid[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1));
  return grid;
}

std::pair<double, KeyRateResult> Evaluator::optimize() {
  auto grid = p_grid();
  double best_p = grid[0];
  KeyRateResult best;
  bool have = false;
  int best_i = 0;
  for (size_t i = 0; i < grid.size(); ++i) {
    KeyRateResult r = evaluate_resolved(grid[i]);
    if (!have || r.key_per_use > best.key_per_use) {
      have = true;
      best = r;
      best_p = grid[i];
      best_i = static_cast<int>(i);
    }
  }
  if (best.key_per_use <= 0) {
    KeyRateResult zero = evaluate_resolved(grid[0]);
    zero.note = "no positive rate on the p grid";
    return {grid[0], zero};
  }

  // Golden-section on ln p over the bracket around the best grid point.
  double lo = std::log(grid[static_cast<size_t>(std::max(best_i - 1, 0))]);
  double hi = std::log(grid[std::min<size_t>(best_i + 1, grid.size() - 1)]);
  if (hi > lo) {
    const double phi = (std::sqrt(5.0) - 1) / 2;
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    KeyRateResult f1 = evaluate_resolved(std::exp(x1)), f2 = evaluate_resolved(std::exp(x2));
    auto track = [&](double lx, const KeyRateResult& r) {
      if (r.key_per_use > best.key_per_use) {
        best = r;
        best_p = std::exp(lx);
      }
    };
    track(x1, f1);
    track(x2, f2);
    while (hi - lo > 1e-3) {
      if (f1.key_per_use >= f2.key_per_use) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - phi * (hi - lo);
        f1 = evaluate_resolved(std::exp(x1));
        track(x1, f1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + phi * (hi - lo);
        f2 = evaluate_resolved(std::exp(x2));
        track(x2, f2);
      }
    }
  }
  return {best_p, best};
}

bool Evaluator::positive_rate(const TimingParams& timing) {
  Strategy s = resolve_concrete(cfg_, cfg_.strategy);
  for (double p : p_grid()) {
    if (s == Strategy::auto_select) {
      if (evaluate(p, Strategy::communication_free, timing).key_per_use > 0) return true;
      if (evaluate(p, Strategy::adaptive, timing).key_per_use > 0) return true;
    } else if (evaluate(p, s, timing).key_per_use > 0) {
      return true;
    }
  }
  return false;
}

std::vector<HeraldRecord> herald_records(const ProtocolConfig& cfg, Strategy strategy) {
  strategy = resolve_concrete(cfg, strategy);
  if (strategy == Strategy::auto_select)
    throw std::invalid_argument("herald_records requires a concrete strategy");
  validate(cfg);
  const double t_over_tau = noise_ratio(cfg, strategy);

  std::vector<HeraldRecord> records;
  for (auto& [pattern, state] : build_branches(cfg, cfg.source.p)) {
    double prob = state.trace_real();
    HeraldRecord rec{pattern, prob, {}};
    if (prob > 1e-300) rec.state = add_noise(cfg, state, t_over_tau).normalized();
    records.push_back(std::move(rec));
  }
  return records;
}

KeyRateResult run_protocol(const ProtocolConfig& cfg) {
  if (cfg.p_auto)
    throw std::invalid_argument("run_protocol requires a fixed p (use optimize_p for auto)");
  Evaluator ev(cfg);
  return ev.evaluate_resolved(cfg.source.p);
}

std::pair<double, KeyRateResult> optimize_p(const ProtocolConfig& cfg) {
  Evaluator ev(cfg);
  return ev.optimize();
}

Strategy select_strategy(const ProtocolConfig& cfg) {
  if (cfg.variant == Variant::asymmetric) return Strategy::communication_free;
  auto run_with = [&](Strategy s) {
    ProtocolConfig c = cfg;
    c.strategy = s;
    Evaluator ev(c);
    if (cfg.p_auto) return ev.optimize().second;
    return ev.evaluate(cfg.source.p, s, cfg.timing);
  };
  KeyRateResult free_r = run_with(Strategy::communication_free);
  KeyRateResult adap_r = run_with(Strategy::adaptive);
  return adap_r.key_per_use > free_r.key_per_use ? Strategy::adaptive
                                                 : Strategy::communication_free;
}

}  // namespace diqkd
