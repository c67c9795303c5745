#include "diqkd/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace diqkd {

namespace {

const char* kParams[] = {"L", "t_over_tau", "kappa_ratio", "eta_her", "eta_d", "p"};

bool known_param(const std::string& name) {
  for (const char* p : kParams)
    if (name == p) return true;
  return false;
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr err;
  std::mutex err_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      int i;
      while (!failed && (i = next++) < n) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!err) err = std::current_exception();
          failed = true;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace

void SweepSpec::validate() const {
  if (!known_param(param))
    throw std::invalid_argument("sweep param '" + param +
                                "' (expected L, t_over_tau, kappa_ratio, eta_her, eta_d, or p)");
  if (steps < 2) throw std::invalid_argument("sweep steps must be at least 2");
  if (!(from < to)) throw std::invalid_argument("sweep requires from < to");
  if (log_scale && !(from > 0)) throw std::invalid_argument("log scale requires positive endpoints");
}

std::vector<double> SweepSpec::values() const {
  validate();
  std::vector<double> v(steps);
  for (int i = 0; i < steps; ++i) {
    double f = double(i) / (steps - 1);
    v[i] = log_scale ? std::exp(std::log(from) + f * (std::log(to) - std::log(from)))
                     : from + f * (to - from);
  }
  return v;
}

void apply_param(ProtocolConfig& cfg, const std::string& param, double value) {
  if (param == "L") {
    cfg.L = value;
  } else if (param == "t_over_tau") {
    cfg.timing.t_m = value * cfg.timing.tau;
  } else if (param == "kappa_ratio") {
    cfg.cavity = CavityParams::from_ratio(value);
  } else if (param == "eta_her") {
    cfg.eta_her = value;
  } else if (param == "eta_d") {
    cfg.eta_d = value;
  } else if (param == "p") {
    cfg.source.p = value;
    cfg.p_auto = false;
  } else {
    throw std::invalid_argument("unknown sweep param '" + param + "'");
  }
}

std::string format_sig12(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

std::string csv_header() {
  return "variant,strategy,kappa_ratio,t_over_tau,L_km,eta_her,eta_d,p_opt,p_herald,mu,S,Q,R,"
         "key_per_use,key_per_second";
}

std::string csv_row(const ProtocolConfig& cfg, const KeyRateResult& r) {
  std::string row = cfg.variant == Variant::symmetric ? "symmetric" : "asymmetric";
  row += ',';
  row += r.strategy == Strategy::adaptive ? "adaptive" : "free";
  for (double x : {cfg.cavity.kappa_ratio(), cfg.timing.t_m / cfg.timing.tau, cfg.L, cfg.eta_her,
                   cfg.eta_d, r.p, r.p_herald, r.mu, r.S, r.Q, r.R, r.key_per_use,
                   r.key_per_second}) {
    row += ',';
    row += format_sig12(x);
  }
  return row;
}

KeyRateResult evaluate_point(const ProtocolConfig& cfg) {
  if (cfg.p_auto) return optimize_p(cfg).second;
  return run_protocol(cfg);
}

void run_sweep(const ProtocolConfig& cfg, const SweepSpec& spec, int jobs, std::ostream& out) {
  auto values = spec.values();
  std::vector<std::string> rows(values.size());
  parallel_for(static_cast<int>(values.size()), jobs, [&](int i) {
    ProtocolConfig point = cfg;
    apply_param(point, spec.param, values[static_cast<size_t>(i)]);
    rows[static_cast<size_t>(i)] = csv_row(point, evaluate_point(point));
  });
  out << csv_header() << '\n';
  for (const auto& row : rows) out << row << '\n';
}

void run_grid(const ProtocolConfig& cfg, const SweepSpec& x, const SweepSpec& y, int jobs,
              std::ostream& out) {
  auto xs = x.values(), ys = y.values();
  const int n = static_cast<int>(xs.size() * ys.size());
  std::vector<std::string> rows(static_cast<size_t>(n));
  parallel_for(n, jobs, [&](int i) {
    size_t ix = static_cast<size_t>(i) / ys.size(), iy = static_cast<size_t>(i) % ys.size();
    ProtocolConfig point = cfg;
    apply_param(point, x.param, xs[ix]);
    apply_param(point, y.param, ys[iy]);
    rows[static_cast<size_t>(i)] = csv_row(point, evaluate_point(point));
  });
  out << csv_header() << '\n';
  for (const auto& row : rows) out << row << '\n';
}

double boundary_t_over_tau(const ProtocolConfig& cfg, double kappa_ratio) {
  ProtocolConfig point = cfg;
  apply_param(point, "kappa_ratio", kappa_ratio);
  Evaluator ev(point);
  auto positive_at = [&](double t_over_tau) {
    TimingParams t = point.timing;
    t.t_m = t_over_tau * t.tau;
    return ev.positive_rate(t);
  };

  double lo = 1e-6, hi = 10;
  if (!positive_at(lo)) return -1;
  if (positive_at(hi)) return hi;
  while (hi / lo > 1 + 1e-3) {
    double mid = std::sqrt(lo * hi);
    (positive_at(mid) ? lo : hi) = mid;
  }
  return lo;
}

void run_boundary(const ProtocolConfig& cfg, const SweepSpec& kappa, int jobs,
                  std::ostream& out) {
  if (kappa.param != "kappa_ratio")
    throw std::invalid_argument("boundary sweeps kappa_ratio only");
  auto values = kappa.values();
  std::vector<std::string> rows(values.size());
  parallel_for(static_cast<int>(values.size()), jobs, [&](int i) {
    double k = values[static_cast<size_t>(i)];
    double t = boundary_t_over_tau(cfg, k);
    rows[static_cast<size_t>(i)] = format_sig12(k) + "," + (t < 0 ? "" : format_sig12(t));
  });
  out << "kappa_ratio,t_over_tau_max" << '\n';
  for (const auto& row : rows) out << row << '\n';
}

}  // namespace diqkd
