#include "hypoinv/runner.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hypoinv/config.hpp"
#include "hypoinv/error.hpp"
#include "hypoinv/field_io.hpp"

namespace hypoinv {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::system_clock;

std::string iso_time(Clock::time_point tp) {
  const std::time_t t = Clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunConfig load_config(const RunOptions& opts) {
  RunConfig cfg = opts.config_path.empty() ? RunConfig{} : parse_config(read_text_file(opts.config_path));
  apply_overrides(cfg, opts.seed, opts.threads);
  return cfg;
}

void prepare_out_dir(const RunOptions& opts) {
  if (opts.out_dir.empty()) throw Error(ErrorCode::usage, "an output directory is required");
  const fs::path dir(opts.out_dir);
  if (fs::exists(dir / "manifest.json") && !opts.force)
    throw Error(ErrorCode::usage, "'" + opts.out_dir + "' already holds a run; pass --force to overwrite");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::io, "cannot create output directory '" + opts.out_dir + "'");
}

class Output {
 public:
  Output(const RunOptions& opts, const RunConfig& cfg, std::string command)
      : opts_(opts), cfg_(cfg), command_(std::move(command)), start_(Clock::now()) {}

  void write(const std::string& name, const std::string& content) {
    const std::string path = (fs::path(opts_.out_dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write '" + path + "'");
    out << content;
    if (!out) throw Error(ErrorCode::io, "write failed for '" + path + "'");
    result.files.push_back(path);
  }

  void write_field(const std::string& name, const SpectralField& f) { write(name, field_to_csv(f)); }

  void warn(const std::vector<std::string>& w) {
    for (const auto& s : w)
      if (std::find(result.warnings.begin(), result.warnings.end(), s) == result.warnings.end())
        result.warnings.push_back(s);
  }

  /// Written on success and on failure; lists only files present on disk.
  void finish(const std::string& status, const std::string& error, json extra = json::object()) {
    const auto end = Clock::now();
    json files = json::array();
    for (const auto& f : result.files)
      if (fs::exists(f) && fs::file_size(f) > 0) files.push_back(f);
    json m = {
        {"command", command_},
        {"status", status},
        {"tool_version", HYPOINV_VERSION},
        {"config", json::parse(config_to_json(cfg_))},
        {"config_path", opts_.config_path},
        {"master_seed", cfg_.experiment.master_seed},
        {"estimate_seed", cfg_.estimate.seed},
        {"start_time", iso_time(start_)},
        {"end_time", iso_time(end)},
        {"wall_time_seconds", std::chrono::duration<double>(end - start_).count()},
        {"outputs", files},
        {"warnings", result.warnings},
    };
    if (!error.empty()) m["error"] = error;
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    const std::string path = (fs::path(opts_.out_dir) / "manifest.json").string();
    std::ofstream out(path, std::ios::binary);
    out << m.dump(2) << "\n";
    if (out) result.files.push_back(path);
  }

  RunResult result;

 private:
  const RunOptions& opts_;
  const RunConfig& cfg_;
  std::string command_;
  Clock::time_point start_;
};

std::string series_csv(const std::string& experiment, const std::vector<RateSeries>& series, int n) {
  std::ostringstream os;
  os << "experiment,n,zeta,slope,intercept,r2,rows_used,predicted_exponent,regime,fit_ok\n";
  for (const auto& s : series)
    os << experiment << "," << n << "," << format_double(s.zeta) << "," << format_double(s.fit.slope) << ","
       << format_double(s.fit.intercept) << "," << format_double(s.fit.r2) << "," << s.fit.used_rows.size() << ","
       << format_double(s.prediction.exponent) << "," << to_string(s.prediction.regime) << ","
       << (s.fit_ok ? "true" : "false") << "\n";
  return os.str();
}

std::string curve_dat(const Curve& c) {
  std::ostringstream os;
  os << "# delta value\n";
  for (std::size_t i = 0; i < c.deltas.size(); ++i) os << format_double(c.deltas[i]) << " " << format_double(c.values[i]) << "\n";
  return os.str();
}

std::string zeta_tag(double z) {
  std::ostringstream os;
  os << z;
  return os.str();
}

void check_drops(const RateTable& t) {
  if (t.attempted > 0 && double(t.dropped) >= 0.01 * double(t.attempted))
    throw Error(ErrorCode::not_converged, std::to_string(t.dropped) + " of " + std::to_string(t.attempted) +
                                              " replicates dropped (solver did not converge)");
}

void emit_rate_experiment(Output& out, const ExperimentConfig& ex, json& extra) {
  const bool bayes = ex.mode == ExperimentMode::bayes;
  const auto run = [&](const ExperimentConfig& c) {
    if (bayes) return run_bayes_convergence(c);
    const TruthField tf = make_truth(c.truth, build_lattice(c.model.d, c.model.n));
    return run_frequentist_convergence(c, tf);
  };
  const RateTable table = run(ex);
  out.warn(table.warnings);
  out.write("rates.csv", rate_table_csv(table));
  std::string fits = series_csv(table.experiment, table.series, ex.model.n);
  for (int n : ex.lattice_sizes) {
    if (n == ex.model.n) continue;
    ExperimentConfig c = ex;
    c.model.n = n;
    const std::string more = series_csv(table.experiment, run(c).series, n);
    fits += more.substr(more.find('\n') + 1);
  }
  out.write("fits.csv", fits);
  if (bayes) {
    std::ostringstream os;
    os << "delta,zeta,bias_term,noise_term,total,triangle_ok\n";
    for (const auto& d : table.decomposition)
      os << format_double(d.delta) << "," << format_double(d.zeta) << "," << format_double(d.bias_term) << ","
         << format_double(d.noise_term) << "," << format_double(d.total) << "," << (d.triangle_ok ? "true" : "false")
         << "\n";
    out.write("decomposition.csv", os.str());
  }
  extra["replicates_attempted"] = table.attempted;
  extra["replicates_dropped"] = table.dropped;
  check_drops(table);
}

void emit_contraction(Output& out, const ExperimentConfig& ex) {
  const TruthField truth = make_truth(ex.truth, build_lattice(ex.model.d, ex.model.n));
  const ContractionTable t = run_contraction(ex, truth);
  out.warn(t.warnings);
  std::ostringstream os;
  os << "delta,radius,trace,mise,markov_bound,direct_prob,direct_stderr\n";
  for (const auto& r : t.rows)
    os << format_double(r.delta) << "," << format_double(r.radius) << "," << format_double(r.trace) << ","
       << format_double(r.mise) << "," << format_double(r.markov_bound) << "," << format_double(r.direct_prob) << ","
       << format_double(r.direct_std_error) << "\n";
  out.write("contraction.csv", os.str());
  std::ostringstream fs_;
  fs_ << "path,slope,r2,rows_used,fit_ok,kappa0,predicted_decay,markov_exponent\n";
  const auto line = [&](const char* name, const SlopeFit& f, bool ok) {
    fs_ << name << "," << format_double(f.slope) << "," << format_double(f.r2) << "," << f.used_rows.size() << ","
        << (ok ? "true" : "false") << "," << format_double(t.prediction.exponent) << ","
        << format_double(t.prediction.secondary.value_or(0.0)) << "," << format_double(t.markov_exponent) << "\n";
  };
  line("markov", t.markov_fit, t.markov_fit_ok);
  line("direct", t.direct_fit, t.direct_fit_ok);
  out.write("fits.csv", fs_.str());
}

void emit_credible(Output& out, const ExperimentConfig& ex) {
  const CredibleTable t = run_credible(ex);
  out.warn(t.warnings);
  std::ostringstream os;
  os << "delta,radius,p,stderr,expected_sq_norm,markov_bound\n";
  for (const auto& r : t.rows)
    os << format_double(r.delta) << "," << format_double(r.radius) << "," << format_double(r.p) << ","
       << format_double(r.std_error) << "," << format_double(r.expected_sq_norm) << "," << format_double(r.markov_bound)
       << "\n";
  out.write("credible.csv", os.str());
  std::ostringstream fs_;
  fs_ << "zeta1,alpha,gamma,predicted_decay,slope,r2,rows_used,fit_ok,regime\n";
  fs_ << format_double(ex.zeta1) << "," << format_double(t.alpha) << "," << format_double(t.prediction.exponent) << ","
      << format_double(t.prediction.secondary.value_or(0.0)) << "," << format_double(t.fit.slope) << ","
      << format_double(t.fit.r2) << "," << t.fit.used_rows.size() << "," << (t.fit_ok ? "true" : "false") << ","
      << to_string(t.prediction.regime) << "\n";
  out.write("fits.csv", fs_.str());
}

void emit_appendix_b(Output& out, const ExperimentConfig& ex) {
  const AppendixBResult res = run_appendix_b(ex);
  out.warn(res.warnings);
  for (const auto& c : res.curves) out.write("curve_zeta_" + zeta_tag(c.zeta) + ".dat", curve_dat(c));
  for (const auto& b : res.bounds) out.write("bound_zeta_" + zeta_tag(b.zeta) + ".dat", curve_dat(b));
}

template <typename Body>
RunResult run_guarded(const RunOptions& opts, const RunConfig& cfg, const std::string& command, Body&& body) {
  prepare_out_dir(opts);
  Output out(opts, cfg, command);
  json extra = json::object();
  try {
    body(out, extra);
  } catch (const std::exception& e) {
    out.finish("failed", e.what(), extra);
    throw;
  }
  out.finish("ok", "", extra);
  return out.result;
}

}  // namespace

std::string rate_table_csv(const RateTable& table) {
  std::ostringstream os;
  os << "experiment,delta,zeta,mean_error,stderr,n,predicted_exponent,regime\n";
  for (const auto& r : table.rows)
    os << table.experiment << "," << format_double(r.delta) << "," << format_double(r.zeta) << ","
       << format_double(r.mean_error) << "," << format_double(r.std_error) << "," << r.n << ","
       << format_double(r.predicted_exponent) << "," << to_string(r.regime) << "\n";
  return os.str();
}

RunResult run_estimate(const RunOptions& opts) {
  const RunConfig cfg = load_config(opts);
  const EstimateConfig& est = cfg.estimate;
  const std::string data_path = opts.data_path.empty() ? est.data_path : opts.data_path;
  return run_guarded(opts, cfg, "estimate", [&](Output& out, json& extra) {
    const GaussianModel model = build_model(est.model, est.delta);
    out.warn(model.warnings());
    SpectralField m = SpectralField::zeros(model.lattice);
    if (!data_path.empty()) {
      m = read_field_csv(data_path);
      if (!same_lattice(m.lattice(), model.lattice))
        throw Error(ErrorCode::size_mismatch, "data lattice does not match the configured model");
    } else {
      SpectralField u = est.synth == "prior" ? sample_prior(model.prior, model.lattice, derive_seed(est.seed, 0))
                                             : make_truth(est.synth, model.lattice).u;
      m = apply(model.forward, u) + est.delta * sample_white_noise(model.lattice, derive_seed(est.seed, 1));
      out.write_field("truth.csv", u);
      out.write_field("data.csv", m);
    }
    SolveDiagnostics diag;
    const SpectralField map = map_estimate(model, m, &diag);
    out.write_field("map.csv", map);
    const double trace = posterior_trace(posterior_covariance(model), model.lattice, est.trace_index);
    json summary = {
        {"delta", est.delta},
        {"trace_index", est.trace_index},
        {"posterior_trace", trace},
        {"solver_iterations", diag.iterations},
        {"solver_relative_residual", diag.relative_residual},
        {"normal_equation_residual", normal_equation_residual(model, map, m)},
        {"data_source", data_path.empty() ? "synthetic:" + est.synth : data_path},
    };
    std::ostringstream os;
    // Doubles are dumped by nlohmann with round-trip precision.
    os << summary.dump(2) << "\n";
    out.write("summary.json", os.str());
    extra["posterior_trace"] = trace;
  });
}

RunResult run_experiment(const RunOptions& opts) {
  const RunConfig cfg = load_config(opts);
  const ExperimentConfig& ex = cfg.experiment;
  return run_guarded(opts, cfg, "experiment", [&](Output& out, json& extra) {
    extra["mode"] = to_string(ex.mode);
    switch (ex.mode) {
      case ExperimentMode::bayes:
      case ExperimentMode::frequentist: emit_rate_experiment(out, ex, extra); break;
      case ExperimentMode::contraction: emit_contraction(out, ex); break;
      case ExperimentMode::credible: emit_credible(out, ex); break;
      case ExperimentMode::appendix_b: emit_appendix_b(out, ex); break;
    }
  });
}

std::string rates_report(const SmoothnessParams& p, double zeta, std::optional<double> kappa, double zeta1,
                         std::optional<double> alpha) {
  const RatePrediction b = bayes_rate(p, zeta);
  const RatePrediction f = frequentist_rate(p);
  const RatePrediction c = contraction_rate(p, kappa);
  const RatePrediction g = credible_rate(p, zeta1, alpha);
  std::ostringstream os;
  os << "parameters r=" << format_double(p.r) << " s=" << format_double(p.s) << " t=" << format_double(p.t)
     << " t0=" << format_double(p.t0) << " d=" << p.d << " tau=" << format_double(p.tau()) << "\n";
  os << "bayes zeta=" << format_double(zeta) << " exponent=" << format_double(b.exponent) << " regime=" << to_string(b.regime)
     << "\n";
  os << "frequentist exponent=" << format_double(f.exponent) << " regime=" << to_string(f.regime) << "\n";
  os << "contraction kappa0=" << format_double(c.exponent);
  if (c.secondary) os << " kappa=" << format_double(*kappa) << " decay=" << format_double(*c.secondary);
  os << " regime=" << to_string(c.regime) << "\n";
  os << "credible zeta1=" << format_double(zeta1) << " gamma=" << format_double(g.exponent);
  if (g.secondary) os << " alpha=" << format_double(*alpha) << " decay=" << format_double(*g.secondary);
  os << " regime=" << to_string(g.regime) << "\n";

  std::vector<std::string> warnings;
  os << "hypotheses\n";
  for (const auto* pred : {&b, &f, &c, &g})
    for (const auto& h : pred->hypotheses) {
      bool seen = false;
      for (const auto& w : warnings) seen = seen || w == h.name;
      if (seen) continue;
      warnings.push_back(h.name);
      os << "  [" << (h.ok ? "ok" : "violated") << "] " << h.name << "\n";
    }
  for (const auto* pred : {&b, &f, &c, &g})
    for (const auto& w : pred->warnings()) {
      const std::string line = "warning: " + w + "\n";
      if (os.str().find(line) == std::string::npos) os << line;
    }
  return os.str();
}

}  // namespace hypoinv
