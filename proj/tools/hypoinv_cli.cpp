// hypoinv command-line tool: rates | estimate | experiment.
// Exit codes: 0 success, 1 usage error, 2 config error, 3 runtime failure.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "hypoinv/hypoinv.h"

namespace {

int exit_code(hi_status st) {
  switch (st) {
    case HI_OK: return 0;
    case HI_ERR_CONFIG: return 2;
    case HI_ERR_USAGE: return 1;
    default: return 3;
  }
}

int report(hi_status st) {
  if (st != HI_OK) std::cerr << "error: " << hi_last_error() << "\n";
  return exit_code(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hypoelliptic Bayesian inverse problems on the torus"};
  app.set_version_flag("--version", std::string(hi_version()));
  app.require_subcommand(1);

  std::string config, out_dir, data;
  std::uint64_t seed = 0;
  int threads = 0;
  bool force = false;

  const double nan = std::numeric_limits<double>::quiet_NaN();
  double r = nan, s = nan, t = nan, t0 = nan, zeta = 0.0, kappa = nan, zeta1 = -3.0, alpha = nan;
  int d = 0;

  auto* rates = app.add_subcommand("rates", "print predicted exponents, regimes and hypothesis flags");
  rates->add_option("--config", config, "config file; its model section supplies defaults")->envname("HYPOINV_CONFIG");
  rates->add_option("--r", r, "prior smoothing half-order");
  rates->add_option("--s", s, "noise Sobolev index");
  rates->add_option("--t", t, "forward upper order");
  rates->add_option("--t0", t0, "forward lower order");
  rates->add_option("--d", d, "dimension");
  rates->add_option("--zeta", zeta, "Sobolev index of the Bayes error");
  rates->add_option("--kappa", kappa, "contraction radius exponent");
  rates->add_option("--zeta1", zeta1, "credible ball Sobolev index");
  rates->add_option("--alpha", alpha, "credible radius exponent");

  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON config file")->envname("HYPOINV_CONFIG");
    sub->add_option("--out", out_dir, "output directory")->required()->envname("HYPOINV_OUT");
    sub->add_option("--seed", seed, "master seed override")->envname("HYPOINV_SEED");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber)->envname("HYPOINV_THREADS");
    sub->add_flag("--force", force, "overwrite an existing run")->envname("HYPOINV_FORCE");
  };
  auto* estimate = app.add_subcommand("estimate", "MAP estimate and posterior trace");
  add_run_flags(estimate);
  estimate->add_option("--data", data, "data field CSV (l0[,l1[,l2]],re,im)");
  auto* experiment = app.add_subcommand("experiment", "run a Monte Carlo experiment");
  add_run_flags(experiment);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (rates->parsed()) {
    hi_params p{nan, nan, nan, nan, 0};
    if (!config.empty()) {
      const hi_status st = hi_params_from_config(config.c_str(), &p);
      if (st != HI_OK) return report(st);
    }
    if (!std::isnan(r)) p.r = r;
    if (!std::isnan(s)) p.s = s;
    if (!std::isnan(t)) p.t = t;
    if (!std::isnan(t0)) p.t0 = t0;
    if (d > 0) p.d = d;
    if (std::isnan(p.r) || std::isnan(p.s) || std::isnan(p.t) || std::isnan(p.t0) || p.d < 1) {
      std::cerr << "error: r, s, t, t0 and d are required (flags or --config)\n";
      return 1;
    }
    size_t needed = 0;
    hi_status st = hi_rates_report(&p, zeta, kappa, zeta1, alpha, nullptr, 0, &needed);
    if (st != HI_OK) return report(st);
    std::vector<char> buf(needed + 1);
    st = hi_rates_report(&p, zeta, kappa, zeta1, alpha, buf.data(), buf.size(), &needed);
    if (st != HI_OK) return report(st);
    std::cout << buf.data();
    return 0;
  }

  hi_run_options opts{};
  opts.config_path = config.empty() ? nullptr : config.c_str();
  opts.data_path = data.empty() ? nullptr : data.c_str();
  opts.out_dir = out_dir.c_str();
  opts.force = force ? 1 : 0;
  opts.has_seed = (estimate->parsed() ? estimate->count("--seed") : experiment->count("--seed")) > 0 ? 1 : 0;
  opts.seed = seed;
  opts.threads = threads;
  const hi_status st = estimate->parsed() ? hi_run_estimate(&opts) : hi_run_experiment(&opts);
  if (st == HI_OK) std::cout << "wrote " << out_dir << "/manifest.json\n";
  return report(st);
}
