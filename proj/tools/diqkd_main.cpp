#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "diqkd/sweep.hpp"

namespace {

using namespace diqkd;

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOpts {
  std::string variant = "symmetric";
  std::string strategy = "auto";
  double kappa_ratio = 13;
  double t_over_tau = 0.01;
  double tau_s = 1e-3;
  double tm_s = 1e-5;
  std::string p = "auto";
  int order = 2;
  double L = 0;
  double Latt = 22;
  double eta_her = 1;
  double eta_d = 1;
  double rep_rate = 1e8;
  double c_signal = 2e5;
  std::string noclick = "assign";
  std::string out = "-";
  int jobs = 1;
  std::string config;

  CLI::Option* opt_t_over_tau = nullptr;
  CLI::Option* opt_tau = nullptr;
  CLI::Option* opt_tm = nullptr;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--variant", o.variant, "Protocol variant")
      ->check(CLI::IsMember({"symmetric", "asymmetric"}));
  cmd->add_option("--strategy", o.strategy, "Waiting strategy (symmetric variant)")
      ->check(CLI::IsMember({"free", "adaptive", "auto"}));
  cmd->add_option("--kappa-ratio", o.kappa_ratio, "Cavity kappa/kappa_s (dimensionless)")
      ->check(CLI::NonNegativeNumber);
  o.opt_t_over_tau =
      cmd->add_option("--t-over-tau", o.t_over_tau, "Readout decoherence ratio t_m/tau")
          ->check(CLI::NonNegativeNumber);
  o.opt_tau = cmd->add_option("--tau-s", o.tau_s, "Spin coherence time, seconds")
                  ->check(CLI::PositiveNumber);
  o.opt_tm = cmd->add_option("--tm-s", o.tm_s, "Spin readout time, seconds")
                 ->check(CLI::PositiveNumber);
  cmd->add_option("--p", o.p, "Source pair probability in [0, 0.5], or 'auto' to optimize");
  cmd->add_option("--order", o.order, "Highest retained photon-pair number")
      ->check(CLI::IsMember({1, 2}));
  cmd->add_option("--L", o.L, "Party separation, km")->check(CLI::NonNegativeNumber);
  cmd->add_option("--Latt", o.Latt, "Fiber attenuation length, km")->check(CLI::PositiveNumber);
  cmd->add_option("--eta-her", o.eta_her, "Heralding detector efficiency")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--eta-d", o.eta_d, "Direct photon detector efficiency")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--rep-rate", o.rep_rate, "Source repetition rate, Hz")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--c-signal", o.c_signal, "Heralding signal speed, km/s")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--noclick", o.noclick, "No-click accounting for the key")
      ->check(CLI::IsMember({"assign", "discard"}));
  cmd->add_option("--out", o.out, "CSV destination path, or - for stdout");
  cmd->add_option("--jobs", o.jobs, "Concurrent evaluation limit")->check(CLI::Range(1, 1024));
  cmd->add_option("--config", o.config, "Config file with 'key = value' lines; flags win");
}

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

// Expands a config file into option tokens. Keys use the long option names
// without the leading dashes; a key given explicitly on the command line
// silences the file's copy, and any timing flag on the command line silences
// every timing key in the file so the two forms cannot conflict across
// sources. Unknown keys surface later as unknown options.
std::vector<std::string> config_tokens(const std::string& path,
                                       const std::vector<std::string>& args) {
  std::ifstream in(path);
  if (!in) throw CliError("--config: cannot read '" + path + "'");

  auto given = [&](const std::string& key) {
    const std::string flag = "--" + key;
    for (const auto& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
  };
  auto is_timing = [](const std::string& k) {
    return k == "t-over-tau" || k == "tau-s" || k == "tm-s";
  };
  const bool cli_timing = given("t-over-tau") || given("tau-s") || given("tm-s");

  std::vector<std::string> toks;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    std::string key = eq == std::string::npos ? "" : trim(line.substr(0, eq));
    std::string val = eq == std::string::npos ? "" : trim(line.substr(eq + 1));
    if (val.size() >= 2 && ((val.front() == '"' && val.back() == '"') ||
                            (val.front() == '\'' && val.back() == '\'')))
      val = val.substr(1, val.size() - 2);
    if (key.empty() || key.front() == '-' || val.empty())
      throw CliError("--config: " + path + ":" + std::to_string(lineno) +
                     ": expected 'key = value'");
    if (given(key)) continue;
    if (cli_timing && is_timing(key)) continue;
    toks.push_back("--" + key);
    toks.push_back(val);
  }
  return toks;
}

// Inserts the config file's tokens right after the --config pair, which sits
// after the subcommand name, so the expanded options parse in its scope.
void expand_config(std::vector<std::string>& args) {
  for (size_t i = 0; i < args.size(); ++i) {
    std::string path;
    size_t end = i + 1;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      end = i + 2;
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      continue;
    }
    auto toks = config_tokens(path, args);
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(end), toks.begin(), toks.end());
    return;
  }
}

ProtocolConfig build_config(const CommonOpts& o) {
  ProtocolConfig cfg;
  cfg.variant = o.variant == "symmetric" ? Variant::symmetric : Variant::asymmetric;
  cfg.strategy = o.strategy == "free"       ? Strategy::communication_free
                 : o.strategy == "adaptive" ? Strategy::adaptive
                                            : Strategy::auto_select;
  cfg.cavity = CavityParams::from_ratio(o.kappa_ratio);
  cfg.L = o.L;
  cfg.L_att = o.Latt;
  cfg.eta_her = o.eta_her;
  cfg.eta_d = o.eta_d;
  cfg.rep_rate = o.rep_rate;
  cfg.noclick = o.noclick == "assign" ? NoclickMode::assign_plus : NoclickMode::discard;
  cfg.source.order = o.order;

  const bool has_ratio = o.opt_t_over_tau->count() > 0;
  const bool has_abs = o.opt_tau->count() > 0 || o.opt_tm->count() > 0;
  if (has_ratio && has_abs)
    throw CliError("--t-over-tau conflicts with --tau-s/--tm-s; give one form");
  cfg.timing.tau = o.tau_s;
  cfg.timing.t_m = has_ratio || !has_abs ? o.t_over_tau * o.tau_s : o.tm_s;
  cfg.timing.c_signal = o.c_signal;

  if (o.p == "auto") {
    cfg.p_auto = true;
  } else {
    try {
      size_t used = 0;
      cfg.source.p = std::stod(o.p, &used);
      if (used != o.p.size()) throw std::invalid_argument(o.p);
    } catch (const std::exception&) {
      throw CliError("--p: expected 'auto' or a number, got '" + o.p + "'");
    }
    if (!(cfg.source.p >= 0 && cfg.source.p <= 0.5))
      throw CliError("--p: value must lie in [0, 0.5]");
    cfg.p_auto = false;
  }
  return cfg;
}

struct OutStream {
  std::ofstream file;
  std::ostream* os = nullptr;
};

OutStream open_out(const std::string& path) {
  OutStream s;
  if (path == "-") {
    s.os = &std::cout;
    return s;
  }
  s.file.open(path);
  if (!s.file) throw CliError("--out: cannot open '" + path + "' for writing");
  s.os = &s.file;
  return s;
}

int cmd_keyrate(const CommonOpts& o) {
  ProtocolConfig cfg = build_config(o);
  KeyRateResult r = evaluate_point(cfg);
  auto out = open_out(o.out);
  *out.os << csv_header() << '\n' << csv_row(cfg, r) << '\n';

  std::ostringstream sum;
  sum << "variant: " << (cfg.variant == Variant::symmetric ? "symmetric" : "asymmetric")
      << "  strategy: " << (r.strategy == Strategy::adaptive ? "adaptive" : "free") << '\n'
      << "p: " << format_sig12(r.p) << "  p_herald: " << format_sig12(r.p_herald)
      << "  mu: " << format_sig12(r.mu) << '\n'
      << "S: " << format_sig12(r.S) << "  Q: " << format_sig12(r.Q)
      << "  R: " << format_sig12(r.R) << '\n'
      << "key/use: " << format_sig12(r.key_per_use)
      << "  key/s: " << format_sig12(r.key_per_second) << '\n';
  if (!r.note.empty()) sum << "note: " << r.note << '\n';
  std::cerr << sum.str();
  return 0;
}

SweepSpec spec_from(const std::string& param, double from, double to, int steps,
                    const std::string& scale) {
  return SweepSpec{param, from, to, steps, scale == "log"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Key-rate calculator for cavity-spin entanglement QKD protocols"};
  app.require_subcommand(1);

  CommonOpts o_key, o_sweep, o_grid, o_bnd;

  CLI::App* keyrate = app.add_subcommand("keyrate", "Evaluate one parameter point");
  add_common(keyrate, o_key);

  CLI::App* sweep = app.add_subcommand("sweep", "Sweep one parameter, CSV per point");
  add_common(sweep, o_sweep);
  std::string s_param, s_scale = "linear";
  double s_from = 0, s_to = 0;
  int s_steps = 0;
  sweep->add_option("--param", s_param, "Swept parameter")->required();
  sweep->add_option("--from", s_from, "Sweep start")->required();
  sweep->add_option("--to", s_to, "Sweep end")->required();
  sweep->add_option("--steps", s_steps, "Grid points (>= 2)")->required();
  sweep->add_option("--scale", s_scale, "Grid spacing")->check(CLI::IsMember({"linear", "log"}));

  CLI::App* grid = app.add_subcommand("grid", "Cartesian 2-D sweep, CSV per point");
  add_common(grid, o_grid);
  std::string gx_param, gx_scale = "linear", gy_param, gy_scale = "linear";
  double gx_from = 0, gx_to = 0, gy_from = 0, gy_to = 0;
  int gx_steps = 0, gy_steps = 0;
  grid->add_option("--x-param", gx_param, "Outer swept parameter")->required();
  grid->add_option("--x-from", gx_from)->required();
  grid->add_option("--x-to", gx_to)->required();
  grid->add_option("--x-steps", gx_steps)->required();
  grid->add_option("--x-scale", gx_scale)->check(CLI::IsMember({"linear", "log"}));
  grid->add_option("--y-param", gy_param, "Inner swept parameter")->required();
  grid->add_option("--y-from", gy_from)->required();
  grid->add_option("--y-to", gy_to)->required();
  grid->add_option("--y-steps", gy_steps)->required();
  grid->add_option("--y-scale", gy_scale)->check(CLI::IsMember({"linear", "log"}));

  CLI::App* boundary =
      app.add_subcommand("boundary", "Largest t_m/tau with positive key rate per kappa ratio");
  add_common(boundary, o_bnd);
  std::string b_scale = "linear";
  double b_from = 0, b_to = 0;
  int b_steps = 0;
  boundary->add_option("--from", b_from, "kappa_ratio start")->required();
  boundary->add_option("--to", b_to, "kappa_ratio end")->required();
  boundary->add_option("--steps", b_steps, "Grid points (>= 2)")->required();
  boundary->add_option("--scale", b_scale, "Grid spacing")
      ->check(CLI::IsMember({"linear", "log"}));

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    expand_config(args);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (keyrate->parsed()) return cmd_keyrate(o_key);
    if (sweep->parsed()) {
      ProtocolConfig cfg = build_config(o_sweep);
      auto out = open_out(o_sweep.out);
      run_sweep(cfg, spec_from(s_param, s_from, s_to, s_steps, s_scale), o_sweep.jobs, *out.os);
      return 0;
    }
    if (grid->parsed()) {
      ProtocolConfig cfg = build_config(o_grid);
      auto out = open_out(o_grid.out);
      run_grid(cfg, spec_from(gx_param, gx_from, gx_to, gx_steps, gx_scale),
               spec_from(gy_param, gy_from, gy_to, gy_steps, gy_scale), o_grid.jobs, *out.os);
      return 0;
    }
    if (boundary->parsed()) {
      ProtocolConfig cfg = build_config(o_bnd);
      auto out = open_out(o_bnd.out);
      run_boundary(cfg, spec_from("kappa_ratio", b_from, b_to, b_steps, b_scale), o_bnd.jobs,
                   *out.os);
      return 0;
    }
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
