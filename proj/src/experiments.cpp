#include "hypoinv/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hypoinv/error.hpp"
#include "hypoinv/parallel.hpp"

namespace hypoinv {

namespace {

MultiplierOp base_multiplier(const OperatorSpec& spec, int d) {
  if (spec.kind == "identity") return identity_op();
  if (spec.kind == "bessel" || spec.kind == "variable") return bessel_op(spec.order);
  if (spec.kind == "heat") return heat_op(d - 1);
  throw Error(ErrorCode::config, "unknown operator kind '" + spec.kind + "'");
}

OperatorHandle make_forward(const OperatorSpec& spec, const LatticePtr& lattice) {
  const MultiplierOp base = base_multiplier(spec, lattice->dim());
  if (spec.kind != "variable") return base;
  if (!(std::abs(spec.phi_amplitude) < 1.0))
    throw Error(ErrorCode::config, "variable operator needs |phi_amplitude| < 1");
  std::vector<double> phi(lattice->size());
  for (std::size_t j = 0; j < phi.size(); ++j)
    phi[j] = 1.0 + spec.phi_amplitude * std::cos(grid_coordinate(*lattice, j, 0));
  return variable_coeff_op(phi, base, lattice);
}

struct Moments {
  double mean = 0.0;
  double std_error = 0.0;
  int n = 0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  m.n = static_cast<int>(v.size());
  if (v.empty()) return m;
  double acc = 0.0;
  for (double x : v) acc += x;
  m.mean = acc / double(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.std_error = std::sqrt(ss / double(v.size() - 1)) / std::sqrt(double(v.size()));
  }
  return m;
}

void append_unique(std::vector<std::string>& out, const std::vector<std::string>& add) {
  for (const auto& w : add)
    if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
}

RateSeries fit_series(double zeta, const std::vector<double>& deltas, const std::vector<double>& values,
                      double threshold, RatePrediction prediction) {
  RateSeries s;
  s.zeta = zeta;
  s.prediction = std::move(prediction);
  try {
    s.fit = fit_loglog_slope(deltas, values, threshold);
    s.fit_ok = true;
  } catch (const Error& e) {
    s.fit_error = e.what();
  }
  return s;
}

// Per-replicate outcome; err[id * nz + iz].
struct Replicate {
  bool ok = true;
  std::vector<double> err;
  std::vector<double> bias;
  std::vector<double> noise;
  std::vector<unsigned char> triangle;
};

}  // namespace

std::string to_string(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::bayes: return "bayes";
    case ExperimentMode::frequentist: return "frequentist";
    case ExperimentMode::contraction: return "contraction";
    case ExperimentMode::credible: return "credible";
    case ExperimentMode::appendix_b: return "appendix_b";
  }
  return "unknown";
}

ExperimentMode parse_mode(const std::string& name) {
  for (auto m : {ExperimentMode::bayes, ExperimentMode::frequentist, ExperimentMode::contraction,
                 ExperimentMode::credible, ExperimentMode::appendix_b})
    if (to_string(m) == name) return m;
  throw Error(ErrorCode::config, "unknown mode '" + name + "'");
}

SmoothnessParams template_params(const ModelTemplate& tmpl) {
  const auto fwd = base_multiplier(tmpl.forward, tmpl.d).orders();
  const auto cov = base_multiplier(tmpl.prior, tmpl.d).orders();
  return {0.5 * cov.t, tmpl.s, fwd.t, fwd.t0, tmpl.d};
}

GaussianModel build_model(const ModelTemplate& tmpl, double delta) {
  if (tmpl.prior.kind != "bessel" && tmpl.prior.kind != "identity")
    throw Error(ErrorCode::config, "prior covariance must be bessel or identity");
  const LatticePtr lattice = build_lattice(tmpl.d, tmpl.n);
  const MultiplierOp cov = base_multiplier(tmpl.prior, tmpl.d);
  return GaussianModel{lattice, make_forward(tmpl.forward, lattice),
                       GaussianPrior::from_multiplier(cov, 0.5 * cov.orders().t, lattice), tmpl.s, delta};
}

void ExperimentConfig::validate() const {
  const auto fail = [](const std::string& m) { throw Error(ErrorCode::config, m); };
  if (delta_grid.size() < 4) fail("delta_grid needs at least 4 points");
  for (std::size_t i = 0; i < delta_grid.size(); ++i) {
    if (!(delta_grid[i] > 0.0) || !std::isfinite(delta_grid[i])) fail("delta_grid entries must be positive");
    if (i > 0 && !(delta_grid[i] < delta_grid[i - 1])) fail("delta_grid must be strictly decreasing");
  }
  if (std::log10(delta_grid.front() / delta_grid.back()) < 1.5 - 1e-9)
    fail("delta_grid must span at least 1.5 decades");
  if (n_replicates < 8) fail("n_replicates must be at least 8");
  if (zeta_list.empty()) fail("zeta_list is empty");
  if (model.d < 1 || model.d > 3) fail("model.d must be 1, 2 or 3");
  if (model.n < 4 || model.n % 2 != 0) fail("model.n must be even and at least 4");
  if (!(model.s > 0.0)) fail("model.s must be positive");
  if (threads < 1) fail("threads must be at least 1");
  if (!(saturation_threshold >= 0.0 && saturation_threshold < 1.0)) fail("saturation_threshold must be in [0, 1)");
  if (truth != "hat" && truth != "zero") fail("truth must be 'hat' or 'zero'");
  if (mode == ExperimentMode::contraction && !(c0 > 0.0)) fail("c0 must be positive");
  if (mode == ExperimentMode::credible) {
    if (!(c1 > 0.0)) fail("c1 must be positive");
    if (n_mc < 100) fail("n_mc must be at least 100");
  }
  if (mode == ExperimentMode::contraction && n_mc < 1) fail("n_mc must be positive");
  base_multiplier(model.forward, model.d);
  base_multiplier(model.prior, model.d);
}

std::vector<double> geometric_grid(double start, double stop, int count) {
  if (count < 2 || !(start > 0.0) || !(stop > 0.0)) throw Error(ErrorCode::invalid_argument, "bad geometric grid");
  std::vector<double> out(static_cast<std::size_t>(count));
  const double step = std::log(stop / start) / double(count - 1);
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = start * std::exp(step * i);
  out.back() = stop;
  return out;
}

SlopeFit fit_loglog_slope(std::span<const double> deltas, std::span<const double> values, double saturation_threshold) {
  if (deltas.size() != values.size()) throw Error(ErrorCode::size_mismatch, "deltas and values differ in length");
  SlopeFit fit;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i]) || !(deltas[i] > 0.0)) continue;
    if (i > 0 && values[i - 1] > 0.0 &&
        std::abs(values[i] - values[i - 1]) < saturation_threshold * std::abs(values[i - 1]))
      continue;
    fit.used_rows.push_back(i);
  }
  if (fit.used_rows.size() < 3) throw Error(ErrorCode::invalid_argument, "fewer than 3 usable rows for slope fit");

  double sx = 0, sy = 0;
  const double n = double(fit.used_rows.size());
  for (auto i : fit.used_rows) {
    sx += std::log(deltas[i]);
    sy += std::log(values[i]);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (auto i : fit.used_rows) {
    const double dx = std::log(deltas[i]) - mx, dy = std::log(values[i]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw Error(ErrorCode::invalid_argument, "deltas are all equal");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

const RateSeries& RateTable::series_for(double zeta) const {
  for (const auto& s : series)
    if (s.zeta == zeta) return s;
  throw Error(ErrorCode::invalid_argument, "no series for zeta " + std::to_string(zeta));
}

TruthField make_hat_truth(const LatticePtr& lattice) {
  if (lattice->dim() != 2) throw Error(ErrorCode::invalid_argument, "hat truth is defined for d = 2");
  const auto h = [](double x) { return std::max(0.0, 1.0 - std::abs(x - std::numbers::pi) / (0.5 * std::numbers::pi)); };
  std::vector<double> samples(lattice->size());
  for (std::size_t j = 0; j < samples.size(); ++j)
    samples[j] = h(grid_coordinate(*lattice, j, 0)) * h(grid_coordinate(*lattice, j, 1));
  TruthField out{forward_transform(lattice, samples), {}};
  std::ostringstream os;
  os.precision(17);
  os << "tensor hat h(x)h(y), centre (pi, pi), half-width pi/2; ||u||_H1 = " << sobolev_norm(out.u, 1.0);
  out.description = os.str();
  return out;
}

TruthField make_zero_truth(const LatticePtr& lattice) { return {SpectralField::zeros(lattice), "zero field"}; }

TruthField make_truth(const std::string& kind, const LatticePtr& lattice) {
  if (kind == "hat") return make_hat_truth(lattice);
  if (kind == "zero") return make_zero_truth(lattice);
  throw Error(ErrorCode::config, "unknown truth '" + kind + "'");
}

RateTable run_bayes_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  const GaussianModel base = build_model(cfg.model, cfg.delta_grid.front());
  const std::size_t nd = cfg.delta_grid.size(), nz = cfg.zeta_list.size();
  std::vector<Replicate> reps(static_cast<std::size_t>(cfg.n_replicates));

  parallel_for(reps.size(), cfg.threads, [&](std::size_t i) {
    Replicate& rep = reps[i];
    const std::uint64_t seed = derive_seed(cfg.master_seed, i);
    const SpectralField u = sample_prior(base.prior, base.lattice, derive_seed(seed, 0));
    const SpectralField e = sample_white_noise(base.lattice, derive_seed(seed, 1));
    const SpectralField au = apply(base.forward, u);
    rep.err.resize(nd * nz);
    rep.bias.resize(nd * nz);
    rep.noise.resize(nd * nz);
    rep.triangle.resize(nd * nz);
    try {
      for (std::size_t id = 0; id < nd; ++id) {
        const double delta = cfg.delta_grid[id];
        const GaussianModel model = base.with_delta(delta);
        const SpectralField ud = map_estimate(model, au + delta * e);
        const SpectralField bias = map_estimate(model, au) - u;
        const SpectralField noise = map_estimate(model, delta * e);
        const SpectralField diff = ud - u;
        for (std::size_t iz = 0; iz < nz; ++iz) {
          const double z = cfg.zeta_list[iz];
          const std::size_t k = id * nz + iz;
          rep.err[k] = sobolev_norm(diff, z);
          rep.bias[k] = sobolev_norm(bias, z);
          rep.noise[k] = sobolev_norm(noise, z);
          rep.triangle[k] = rep.err[k] <= (rep.bias[k] + rep.noise[k]) * (1.0 + 1e-12) ? 1 : 0;
        }
      }
    } catch (const Error& err) {
      if (err.code() != ErrorCode::not_converged) throw;
      rep.ok = false;
    }
  });

  RateTable table;
  table.experiment = "bayes";
  table.attempted = cfg.n_replicates;
  for (const auto& r : reps) table.dropped += r.ok ? 0 : 1;
  const SmoothnessParams p = base.params();

  std::vector<std::vector<double>> means(nz, std::vector<double>(nd));
  for (std::size_t iz = 0; iz < nz; ++iz) {
    const RatePrediction pred = bayes_rate(p, cfg.zeta_list[iz]);
    append_unique(table.warnings, pred.warnings());
    for (std::size_t id = 0; id < nd; ++id) {
      const std::size_t k = id * nz + iz;
      std::vector<double> err, bias, noise;
      bool triangle = true;
      for (const auto& r : reps) {
        if (!r.ok) continue;
        err.push_back(r.err[k]);
        bias.push_back(r.bias[k]);
        noise.push_back(r.noise[k]);
        triangle = triangle && r.triangle[k];
      }
      const Moments m = moments(err);
      means[iz][id] = m.mean;
      table.rows.push_back({cfg.delta_grid[id], cfg.zeta_list[iz], m.mean, m.std_error, m.n, pred.exponent,
                            pred.regime, false});
      table.decomposition.push_back(
          {cfg.delta_grid[id], cfg.zeta_list[iz], moments(bias).mean, moments(noise).mean, m.mean, triangle});
    }
    table.series.push_back(fit_series(cfg.zeta_list[iz], cfg.delta_grid, means[iz], cfg.saturation_threshold, pred));
    for (auto row : table.series.back().fit.used_rows) table.rows[iz * nd + row].used_in_fit = true;
  }
  return table;
}

RateTable run_frequentist_convergence(const ExperimentConfig& cfg, const TruthField& truth) {
  cfg.validate();
  const GaussianModel base = build_model(cfg.model, cfg.delta_grid.front());
  if (!same_lattice(base.lattice, truth.u.lattice())) throw Error(ErrorCode::size_mismatch, "truth lattice mismatch");
  const SmoothnessParams p = base.params();
  const double h_tau = sobolev_norm(truth.u, p.tau());
  if (!std::isfinite(h_tau)) throw Error(ErrorCode::invalid_argument, "truth has infinite H^tau norm");

  const std::size_t nd = cfg.delta_grid.size();
  const SpectralField au = apply(base.forward, truth.u);
  std::vector<Replicate> reps(static_cast<std::size_t>(cfg.n_replicates));
  parallel_for(reps.size(), cfg.threads, [&](std::size_t i) {
    Replicate& rep = reps[i];
    const SpectralField e = sample_white_noise(base.lattice, derive_seed(derive_seed(cfg.master_seed, i), 1));
    rep.err.resize(nd);
    try {
      for (std::size_t id = 0; id < nd; ++id) {
        const double delta = cfg.delta_grid[id];
        rep.err[id] = (map_estimate(base.with_delta(delta), au + delta * e) - truth.u).l2_norm_squared();
      }
    } catch (const Error& err) {
      if (err.code() != ErrorCode::not_converged) throw;
      rep.ok = false;
    }
  });

  RateTable table;
  table.experiment = "frequentist";
  table.attempted = cfg.n_replicates;
  for (const auto& r : reps) table.dropped += r.ok ? 0 : 1;
  const RatePrediction pred = frequentist_rate(p);
  table.warnings = pred.warnings();
  std::vector<double> means(nd);
  for (std::size_t id = 0; id < nd; ++id) {
    std::vector<double> err;
    for (const auto& r : reps)
      if (r.ok) err.push_back(r.err[id]);
    const Moments m = moments(err);
    means[id] = m.mean;
    table.rows.push_back({cfg.delta_grid[id], 0.0, m.mean, m.std_error, m.n, pred.exponent, pred.regime, false});
  }
  table.series.push_back(fit_series(0.0, cfg.delta_grid, means, cfg.saturation_threshold, pred));
  for (auto row : table.series.back().fit.used_rows) table.rows[row].used_in_fit = true;
  return table;
}

ContractionTable run_contraction(const ExperimentConfig& cfg, const TruthField& truth) {
  cfg.validate();
  const GaussianModel base = build_model(cfg.model, cfg.delta_grid.front());
  if (!same_lattice(base.lattice, truth.u.lattice())) throw Error(ErrorCode::size_mismatch, "truth lattice mismatch");
  const SmoothnessParams p = base.params();

  ContractionTable table;
  table.prediction = contraction_rate(p, cfg.kappa);
  table.markov_exponent = table.prediction.exponent - 2.0 * cfg.kappa;
  table.warnings = table.prediction.warnings();

  const SpectralField au = apply(base.forward, truth.u);
  const std::size_t nd = cfg.delta_grid.size();
  const std::size_t n_outer = static_cast<std::size_t>(cfg.n_replicates);
  for (std::size_t id = 0; id < nd; ++id) {
    const double delta = cfg.delta_grid[id];
    const GaussianModel model = base.with_delta(delta);
    const double radius = cfg.c0 * std::pow(delta, cfg.kappa);
    // Ball probabilities do not depend on the posterior mean, so one
    // posterior object serves every outer draw.
    const PosteriorGaussian post(model, SpectralField::zeros(base.lattice));
    const double trace = posterior_trace(post.cov(), base.lattice, 0.0);

    std::vector<double> sq_err(n_outer), prob(n_outer);
    parallel_for(n_outer, cfg.threads, [&](std::size_t j) {
      const std::uint64_t seed = derive_seed(cfg.master_seed, j);
      const SpectralField e = sample_white_noise(base.lattice, derive_seed(seed, 1));
      const SpectralField offset = map_estimate(model, au + delta * e) - truth.u;
      sq_err[j] = offset.l2_norm_squared();
      std::size_t outside = 0;
      for (std::size_t i = 0; i < cfg.n_mc; ++i) {
        const SpectralField w = post.sample_deviation(derive_seed(derive_seed(seed, 2), i)) + offset;
        if (std::sqrt(w.l2_norm_squared()) >= radius) ++outside;
      }
      prob[j] = double(outside) / double(cfg.n_mc);
    });
    const Moments mise = moments(sq_err);
    const Moments direct = moments(prob);
    table.rows.push_back({delta, radius, trace, mise.mean, (trace + mise.mean) / (radius * radius), direct.mean,
                          direct.std_error});
  }

  std::vector<double> deltas, markov, direct;
  for (const auto& r : table.rows) {
    deltas.push_back(r.delta);
    markov.push_back(r.markov_bound);
    direct.push_back(r.direct_prob);
  }
  try {
    table.markov_fit = fit_loglog_slope(deltas, markov, cfg.saturation_threshold);
    table.markov_fit_ok = true;
  } catch (const Error&) {
    table.warnings.push_back("Markov bound slope could not be fitted");
  }
  try {
    table.direct_fit = fit_loglog_slope(deltas, direct, cfg.saturation_threshold);
    table.direct_fit_ok = true;
  } catch (const Error&) {
    table.warnings.push_back("direct probability slope could not be fitted (fewer than 3 non-zero rows)");
  }
  return table;
}

CredibleTable run_credible(const ExperimentConfig& cfg) {
  cfg.validate();
  const GaussianModel base = build_model(cfg.model, cfg.delta_grid.front());
  const SmoothnessParams p = base.params();

  CredibleTable table;
  const double gamma = credible_rate(p, cfg.zeta1).exponent;
  table.alpha = cfg.alpha > 0.0 ? cfg.alpha : 0.25 * gamma;
  table.prediction = credible_rate(p, cfg.zeta1, table.alpha);
  table.warnings = table.prediction.warnings();

  for (double delta : cfg.delta_grid) {
    const PosteriorGaussian post(base.with_delta(delta), SpectralField::zeros(base.lattice));
    const double radius = cfg.c1 * std::pow(delta, table.alpha);
    const BallProbability ball = credible_ball_prob(post, cfg.zeta1, radius, cfg.n_mc, cfg.master_seed, cfg.threads);
    const double expected = posterior_trace(post.cov(), base.lattice, cfg.zeta1);
    table.rows.push_back({delta, radius, 1.0 - ball.probability, ball.std_error, expected, expected / (radius * radius)});
  }

  std::vector<double> deltas, ps;
  for (const auto& r : table.rows) {
    deltas.push_back(r.delta);
    ps.push_back(r.p);
  }
  try {
    table.fit = fit_loglog_slope(deltas, ps, cfg.saturation_threshold);
    table.fit_ok = true;
  } catch (const Error& e) {
    table.fit_error = e.what();
  }
  return table;
}

AppendixBResult run_appendix_b(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.model.d != 2) throw Error(ErrorCode::config, "appendix_b runs on d = 2");
  const GaussianModel base = build_model(cfg.model, cfg.delta_grid.front());
  const TruthField truth = make_truth(cfg.truth, base.lattice);
  const SpectralField m = apply(base.forward, truth.u);
  const SmoothnessParams p = base.params();
  const std::size_t nd = cfg.delta_grid.size(), nz = cfg.zeta_list.size();

  std::vector<SpectralField> diffs(nd, SpectralField::zeros(base.lattice));
  parallel_for(nd, cfg.threads,
               [&](std::size_t id) { diffs[id] = truth.u - map_estimate(base.with_delta(cfg.delta_grid[id]), m); });

  AppendixBResult out;
  out.warnings = bayes_rate(p, cfg.zeta_list.front()).warnings();
  const double last = cfg.delta_grid.back();
  for (std::size_t iz = 0; iz < nz; ++iz) {
    const double z = cfg.zeta_list[iz];
    Curve c{z, 0.0, cfg.delta_grid, std::vector<double>(nd)};
    for (std::size_t id = 0; id < nd; ++id) c.values[id] = sobolev_norm(diffs[id], z);
    const double norm = c.values.back();
    if (!(norm > 0.0)) throw Error(ErrorCode::singular, "zero error at the normalisation delta");
    for (auto& v : c.values) v /= norm;
    out.curves.push_back(std::move(c));

    const RatePrediction pred = bayes_rate(p, z);
    Curve b{z, pred.regime == Regime::no_convergence ? bayes_case_ii_exponent(p, z) : pred.exponent, cfg.delta_grid,
            std::vector<double>(nd)};
    for (std::size_t id = 0; id < nd; ++id) b.values[id] = std::pow(cfg.delta_grid[id] / last, b.exponent);
    out.bounds.push_back(std::move(b));
  }
  return out;
}

ExperimentConfig default_config(ExperimentMode mode) {
  ExperimentConfig cfg;
  cfg.mode = mode;
  cfg.delta_grid = geometric_grid(1e-1, 1e-3, 7);
  switch (mode) {
    case ExperimentMode::bayes:
      cfg.zeta_list = {-3.5, 0.0};
      break;
    case ExperimentMode::frequentist:
      cfg.zeta_list = {0.0};
      break;
    case ExperimentMode::contraction:
      cfg.model.n = 64;
      cfg.zeta_list = {0.0};
      cfg.kappa = 0.1;
      cfg.c0 = 1.0;
      cfg.n_mc = 200;
      break;
    case ExperimentMode::credible:
      cfg.model.n = 64;
      cfg.model.prior = {"bessel", -1.0, 0.0};
      cfg.zeta_list = {-3.0};
      cfg.delta_grid = geometric_grid(1e-1, std::pow(10.0, -2.5), 8);
      cfg.zeta1 = -3.0;
      // Places the drop of p_delta inside the delta window: p is close to 1
      // at the largest delta.
      cfg.c1 = 0.45;
      cfg.n_mc = 5000;
      break;
    case ExperimentMode::appendix_b:
      cfg.model.n = 256;
      cfg.model.prior = {"bessel", -1.0, 0.0};
      cfg.delta_grid = geometric_grid(5e-2, 5e-6, 9);
      cfg.zeta_list = {-1.0, -0.5, 0.0, 0.5, 1.0};
      break;
  }
  return cfg;
}

}  // namespace hypoinv
