#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "expander/cli_io.hpp"

namespace fs = std::filesystem;
using namespace expander;

namespace {

// --config text first, then each --set in order.
RunConfig load(const std::string& config, const std::vector<std::string>& sets) {
  if (config.empty()) {
    std::string text;
    for (const auto& s : sets) text += s + "\n";
    return parse_config(text);
  }
  RunConfig cfg = read_config(config);
  for (const auto& s : sets) apply_override(cfg, s);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual solver and estimate audits for self-expanders of sigma_k curvature flow"};
  app.require_subcommand(1);

  std::string config, out, fields_dir, field_path;
  std::vector<std::string> sets;
  bool no_coarse = false;
  int n = 2, k = 2, angles = 32;
  double alpha = 1.0, s = 0.9, boundary = -1.0, rmax = 50.0;

  auto add_run_opts = [&](CLI::App* c) {
    c->add_option("--config", config, "key=value configuration file");
    c->add_option("--set", sets, "override, key=value (repeatable, applied after --config)");
    c->add_option("--out", out, "output directory")->required();
  };
  auto* gauss = app.add_subcommand("solve-gauss", "Gauss dual problem over the s schedule, with barriers");
  add_run_opts(gauss);
  auto* quot = app.add_subcommand("solve-quotient", "quotient dual problem over the r schedule, with barriers");
  add_run_opts(quot);
  quot->add_flag("--no-coarse", no_coarse, "skip the half-resolution run");
  auto* bars = app.add_subcommand("barriers", "barrier fields only");
  add_run_opts(bars);
  auto* audit = app.add_subcommand("audit", "estimate audits on solver output");
  audit->add_option("--fields", fields_dir, "directory written by solve-gauss or solve-quotient")->required();
  audit->add_option("--out", out, "output directory")->required();
  auto* oracle = app.add_subcommand("oracle", "rotationally symmetric shooting solve");
  oracle->add_option("--n", n)->required();
  oracle->add_option("--k", k)->required();
  oracle->add_option("--alpha", alpha)->required();
  oracle->add_option("--s", s, "s for k = n, the ball radius r for k < n")->required();
  oracle->add_option("--boundary", boundary, "u* on the outer circle")->required();
  oracle->add_option("--out", out, "output directory");
  auto* recon = app.add_subcommand("reconstruct", "Legendre reconstruction of a dumped field");
  recon->add_option("--field", field_path)->required();
  recon->add_option("--rmax", rmax)->default_val(50.0);
  recon->add_option("--angles", angles)->default_val(32);
  recon->add_option("--out", out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gauss) {
      run_solve_gauss(load(config, sets), out);
    } else if (*quot) {
      run_solve_quotient(load(config, sets), out, !no_coarse);
    } else if (*bars) {
      run_barriers(load(config, sets), out);
    } else if (*audit) {
      const EstimateReport rep = run_audit(fields_dir, out);
      for (const auto& r : rep.records) std::printf("%-30s %s\n", r.name.c_str(), r.passed ? "pass" : "FAIL");
      return rep.passed ? 0 : 3;
    } else if (*oracle) {
      const RadialProfile P = run_oracle(n, k, alpha, s, boundary, out);
      std::printf("u*(0) = %.17g\nmax residual = %.3e\nshooting monotone = %s\n", P.values.front(),
                  P.max_residual, P.shooting_monotone ? "yes" : "no");
    } else if (*recon) {
      run_reconstruct(field_path, rmax, angles, out);
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
