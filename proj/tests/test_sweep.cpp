#include "diqkd/sweep.hpp"

#include <cmath>
#include <sstream>

#include "diqkd/bell_keyrate.hpp"
#include "doctest.h"

using namespace diqkd;

namespace {

ProtocolConfig fast_asym() {
  ProtocolConfig cfg;
  cfg.variant = Variant::asymmetric;
  cfg.strategy = Strategy::communication_free;
  cfg.cavity = CavityParams::from_ratio(13);
  cfg.source = {0.01, 1};
  cfg.p_auto = false;
  cfg.eta_her = 0.9;
  cfg.eta_d = 0.9;
  cfg.timing.t_m = 1e-5;
  return cfg;
}

int count_fields(const std::string& line) {
  int n = 1;
  for (char c : line)
    if (c == ',') ++n;
  return n;
}

}  // namespace

TEST_SUITE("sweep") {

TEST_CASE("sweep specs validate their fields") {
  CHECK_THROWS_AS((SweepSpec{"bogus", 0, 1, 5, false}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((SweepSpec{"L", 0, 1, 1, false}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((SweepSpec{"L", 2, 1, 5, false}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((SweepSpec{"L", 1, 1, 5, false}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((SweepSpec{"p", 0, 0.1, 5, true}.validate()), std::invalid_argument);
  SweepSpec ok{"t_over_tau", 1e-4, 1e-1, 7, true};
  ok.validate();
}

TEST_CASE("sweep values cover both spacings") {
  SweepSpec lin{"L", 0, 10, 3, false};
  auto lv = lin.values();
  REQUIRE(lv.size() == 3);
  CHECK(lv[0] == doctest::Approx(0.0));
  CHECK(lv[1] == doctest::Approx(5.0));
  CHECK(lv[2] == doctest::Approx(10.0));

  SweepSpec log{"p", 1e-4, 1e-2, 3, true};
  auto gv = log.values();
  CHECK(gv[0] == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(gv[1] == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(gv[2] == doctest::Approx(1e-2).epsilon(1e-12));
}

TEST_CASE("apply_param writes each knob to the right slot") {
  ProtocolConfig cfg = fast_asym();
  apply_param(cfg, "L", 42);
  CHECK(cfg.L == 42);
  apply_param(cfg, "kappa_ratio", 7);
  CHECK(cfg.cavity.kappa_ratio() == doctest::Approx(7.0));
  apply_param(cfg, "eta_her", 0.5);
  CHECK(cfg.eta_her == 0.5);
  apply_param(cfg, "eta_d", 0.6);
  CHECK(cfg.eta_d == 0.6);
  apply_param(cfg, "t_over_tau", 0.02);
  CHECK(cfg.timing.t_m == doctest::Approx(0.02 * cfg.timing.tau).epsilon(1e-14));
  cfg.p_auto = true;
  apply_param(cfg, "p", 0.05);
  CHECK(cfg.source.p == 0.05);
  CHECK(!cfg.p_auto);
  CHECK_THROWS_AS(apply_param(cfg, "bogus", 1), std::invalid_argument);
}

TEST_CASE("twelve significant digit formatting") {
  CHECK(format_sig12(2.828427124746190) == "2.82842712475");
  CHECK(format_sig12(0.0) == "0");
  CHECK(format_sig12(1e-6) == "1e-06");
  CHECK(format_sig12(1592.360599110) == "1592.36059911");
  CHECK(format_sig12(-0.5) == "-0.5");
}

TEST_CASE("CSV header names the full column set") {
  CHECK(csv_header() ==
        "variant,strategy,kappa_ratio,t_over_tau,L_km,eta_her,eta_d,p_opt,p_herald,mu,S,Q,R,"
        "key_per_use,key_per_second");
  CHECK(count_fields(csv_header()) == 15);
}

TEST_CASE("CSV rows carry one value per column") {
  ProtocolConfig cfg = fast_asym();
  KeyRateResult r = run_protocol(cfg);
  std::string row = csv_row(cfg, r);
  CHECK(count_fields(row) == 15);
  CHECK(row.substr(0, 16) == "asymmetric,free,");
  std::istringstream iss(row);
  std::string field;
  std::getline(iss, field, ',');
  std::getline(iss, field, ',');
  std::getline(iss, field, ',');
  CHECK(field == format_sig12(13));
}

TEST_CASE("evaluate_point honors the p mode") {
  ProtocolConfig cfg = fast_asym();
  KeyRateResult fixed = evaluate_point(cfg);
  CHECK(fixed.p == 0.01);
  ProtocolConfig autop = cfg;
  autop.p_auto = true;
  autop.source.order = 1;
  KeyRateResult opt = evaluate_point(autop);
  CHECK(opt.key_per_use >= fixed.key_per_use - 1e-15);
}

TEST_CASE("sweeps emit ordered deterministic rows") {
  ProtocolConfig cfg = fast_asym();
  SweepSpec spec{"eta_d", 0.7, 1.0, 4, false};

  std::ostringstream a, b, c;
  run_sweep(cfg, spec, 1, a);
  run_sweep(cfg, spec, 1, b);
  run_sweep(cfg, spec, 3, c);
  CHECK(a.str() == b.str());
  CHECK(a.str() == c.str());

  std::istringstream lines(a.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == csv_header());
  int rows = 0;
  double prev_key = -1;
  while (std::getline(lines, line)) {
    ++rows;
    CHECK(count_fields(line) == 15);
    auto pos = line.rfind(',');
    double key = std::stod(line.substr(pos + 1));
    CHECK(key >= prev_key);  // better detectors, more key
    prev_key = key;
  }
  CHECK(rows == 4);
}

TEST_CASE("grids nest the inner parameter fastest") {
  ProtocolConfig cfg = fast_asym();
  SweepSpec x{"eta_d", 0.8, 0.9, 2, false};
  SweepSpec y{"L", 0, 10, 2, false};
  std::ostringstream out;
  run_grid(cfg, x, y, 1, out);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);  // header
  std::vector<std::pair<double, double>> seen;
  while (std::getline(lines, line)) {
    std::istringstream iss(line);
    std::string f;
    for (int i = 0; i < 5; ++i) std::getline(iss, f, ',');
    double L = std::stod(f);
    std::getline(iss, f, ',');
    std::getline(iss, f, ',');
    double eta_d = std::stod(f);
    seen.push_back({eta_d, L});
  }
  REQUIRE(seen.size() == 4);
  CHECK(seen[0] == std::pair<double, double>{0.8, 0.0});
  CHECK(seen[1] == std::pair<double, double>{0.8, 10.0});
  CHECK(seen[2] == std::pair<double, double>{0.9, 0.0});
  CHECK(seen[3] == std::pair<double, double>{0.9, 10.0});
}

TEST_CASE("positivity boundary matches the closed-form decay model") {
  // ideal cavity, single-pair source: the heralded state is a Werner state
  // of visibility e^{-2t/tau}, so the key-positivity edge solves
  // R(0, (1-v)/2, 2*sqrt2*v) = 0 in closed form
  auto model_rate = [](double x) {
    double v = std::exp(-2 * x);
    return keyrate_factor(0, (1 - v) / 2, 2 * std::sqrt(2.0) * v);
  };
  double lo = 0.01, hi = 0.2;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (model_rate(mid) > 0 ? lo : hi) = mid;
  }
  double oracle = 0.5 * (lo + hi);
  CHECK(oracle == doctest::Approx(0.07714906400050299).epsilon(1e-10));

  ProtocolConfig cfg;
  cfg.variant = Variant::symmetric;
  cfg.strategy = Strategy::communication_free;
  cfg.source.order = 1;
  cfg.p_auto = true;
  double edge = boundary_t_over_tau(cfg, 1e9);
  CHECK(edge == doctest::Approx(oracle).epsilon(3e-3));
}

TEST_CASE("boundary reports absence when detection is too lossy") {
  // at eta_d = 0.5 the no-click penalty mu reaches 1, so the rate is zero for
  // every state and every wait time; the edge does not exist
  ProtocolConfig cfg;
  cfg.variant = Variant::asymmetric;
  cfg.strategy = Strategy::communication_free;
  cfg.source.order = 1;
  cfg.p_auto = true;
  cfg.eta_d = 0.5;
  CHECK(boundary_t_over_tau(cfg, 13) < 0);

  SweepSpec spec{"kappa_ratio", 5, 13, 2, false};
  std::ostringstream out;
  run_boundary(cfg, spec, 1, out);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "kappa_ratio,t_over_tau_max");
  std::getline(lines, line);
  CHECK(line == "5,");  // empty boundary marker
  std::getline(lines, line);
  CHECK(line == "13,");

  SweepSpec bad{"L", 1, 2, 2, false};
  CHECK_THROWS_AS(run_boundary(cfg, bad, 1, out), std::invalid_argument);
}

}  // TEST_SUITE
