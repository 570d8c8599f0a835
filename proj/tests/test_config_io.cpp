#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hypoinv/config.hpp"
#include "hypoinv/field_io.hpp"
#include "hypoinv/runner.hpp"
#include "oracles.hpp"

using namespace hypoinv;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hypoinv_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string error_message(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("config parsing fills the selected mode defaults") {
  const auto cfg = parse_config(R"({"mode": "credible", "master_seed": 5})");
  CHECK(cfg.experiment.mode == ExperimentMode::credible);
  CHECK(cfg.experiment.master_seed == 5);
  const auto def = default_config(ExperimentMode::credible);
  CHECK(cfg.experiment.delta_grid == def.delta_grid);
  CHECK(cfg.experiment.c1 == def.c1);

  const auto g = parse_config(R"({"delta_grid": {"start": 0.1, "stop": 0.001, "count": 5}})");
  CHECK(g.experiment.delta_grid == geometric_grid(0.1, 0.001, 5));
  const auto m = parse_config(R"({"model": {"n": 64, "forward": {"kind": "heat"}}})");
  CHECK(m.experiment.model.n == 64);
  CHECK(m.experiment.model.forward.kind == "heat");
}

TEST_CASE("config errors carry the offending line") {
  const std::string unknown = "{\n  \"mode\": \"bayes\",\n  \"bogus\": 1\n}";
  const auto msg = error_message(unknown);
  CHECK(msg.find("line 3") != std::string::npos);
  CHECK(msg.find("bogus") != std::string::npos);

  const std::string wrong_type = "{\n  \"model\": {\n    \"n\": \"big\"\n  }\n}";
  CHECK(error_message(wrong_type).find("line 3") != std::string::npos);

  const std::string syntax = "{\n  \"mode\": \"bayes\"\n  \"n_replicates\": 8\n}";
  CHECK(error_message(syntax).find("line 3") != std::string::npos);

  CHECK_THROWS_CODE(parse_config(R"({"mode": "nonsense"})"), config);
  CHECK_THROWS_CODE(parse_config(R"({"delta_grid": [0.1, 0.01]})"), config);
  CHECK_THROWS_CODE(parse_config(R"({"n_replicates": 4})"), config);
}

TEST_CASE("flag overrides beat file values") {
  auto cfg = parse_config(R"({"master_seed": 5, "threads": 2})");
  apply_overrides(cfg, 9u, 3);
  CHECK(cfg.experiment.master_seed == 9);
  CHECK(cfg.estimate.seed == 9);
  CHECK(cfg.experiment.threads == 3);
  CHECK_THROWS_CODE(apply_overrides(cfg, std::nullopt, 0), usage);

  // The echo parses back to the same configuration.
  const auto again = parse_config(config_to_json(cfg));
  CHECK(again.experiment.master_seed == 9);
  CHECK(again.experiment.delta_grid == cfg.experiment.delta_grid);
}

TEST_CASE("field CSV round trip is exact") {
  for (int d : {1, 2, 3}) {
    const auto lat = build_lattice(d, 8);
    const auto f = forward_transform(lat, oracle::random_grid(lat->size(), 11));
    const auto back = field_from_csv(field_to_csv(f));
    REQUIRE(back.size() == f.size());
    CHECK(back.lattice()->dim() == d);
    for (std::size_t k = 0; k < f.size(); ++k) CHECK(back[k] == f[k]);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("field CSV rejects malformed input") {
  CHECK_THROWS(field_from_csv("l0,re,im\n0,1,0\n1,0,0\n"));
  CHECK_THROWS(field_from_csv("l0,re,im\n0,1,0\n0,1,0\n1,0,0\n-2,0,0\n"));
  CHECK_THROWS(field_from_csv("l0,re,im\n0,1,0\n1,0,0\n9,0,0\n-1,0,0\n"));
  CHECK_THROWS(field_from_csv("a,b\n"));
  CHECK_THROWS_CODE(read_field_csv("/nonexistent/field.csv"), io);
}

TEST_CASE("estimate runs are reproducible for a fixed seed") {
  const auto a = scratch("est_a"), b = scratch("est_b");
  RunOptions o;
  o.seed = 7;
  o.out_dir = a.string();
  run_estimate(o);
  o.out_dir = b.string();
  const auto res = run_estimate(o);
  for (const char* f : {"map.csv", "data.csv", "truth.csv", "summary.json"})
    CHECK(slurp(a / f) == slurp(b / f));
  CHECK(res.files.back().find("manifest.json") != std::string::npos);

  const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(manifest["status"] == "ok");
  CHECK(manifest["command"] == "estimate");
  CHECK(manifest["outputs"].size() == 4);
  CHECK(manifest.contains("config"));
  CHECK(manifest.contains("wall_time_seconds"));
}

TEST_CASE("estimate posterior trace grows with the noise level") {
  const auto dir = scratch("est_cfg");
  write(dir / "lo.json", R"({"estimate": {"delta": 0.01}})");
  write(dir / "hi.json", R"({"estimate": {"delta": 0.02}})");
  RunOptions o;
  o.config_path = (dir / "lo.json").string();
  o.out_dir = (dir / "lo").string();
  run_estimate(o);
  o.config_path = (dir / "hi.json").string();
  o.out_dir = (dir / "hi").string();
  run_estimate(o);
  const auto lo = nlohmann::json::parse(slurp(dir / "lo" / "summary.json"));
  const auto hi = nlohmann::json::parse(slurp(dir / "hi" / "summary.json"));
  CHECK(hi["posterior_trace"].get<double>() > lo["posterior_trace"].get<double>());
}

TEST_CASE("estimate from a data file") {
  const auto dir = scratch("est_data");
  const auto lat = build_lattice(2, 32);
  write_field_csv((dir / "m.csv").string(), forward_transform(lat, oracle::random_grid(lat->size(), 3)));
  RunOptions o;
  o.data_path = (dir / "m.csv").string();
  o.out_dir = (dir / "out").string();
  run_estimate(o);
  CHECK(fs::exists(dir / "out" / "map.csv"));
  CHECK_FALSE(fs::exists(dir / "out" / "truth.csv"));
  CHECK(read_field_csv((dir / "out" / "map.csv").string()).size() == lat->size());
}

TEST_CASE("an existing run directory is not overwritten without force") {
  const auto dir = scratch("guard");
  RunOptions o;
  o.out_dir = (dir / "run").string();
  run_estimate(o);
  const auto before = slurp(dir / "run" / "manifest.json");
  CHECK_THROWS_CODE(run_estimate(o), usage);
  CHECK(slurp(dir / "run" / "manifest.json") == before);
  o.force = true;
  CHECK_NOTHROW(run_estimate(o));
}

TEST_CASE("failed runs still leave a manifest") {
  const auto dir = scratch("fail");
  write(dir / "bad.json", R"({"estimate": {"data": "/nonexistent/m.csv"}})");
  RunOptions o;
  o.config_path = (dir / "bad.json").string();
  o.out_dir = (dir / "run").string();
  CHECK_THROWS_CODE(run_estimate(o), io);
  const auto manifest = nlohmann::json::parse(slurp(dir / "run" / "manifest.json"));
  CHECK(manifest["status"] == "failed");
  CHECK(manifest["error"].get<std::string>().find("nonexistent") != std::string::npos);
}

TEST_CASE("deblurring sweep writes one curve and one bound per zeta") {
  const auto dir = scratch("appb");
  write(dir / "cfg.json", R"({"mode": "appendix_b", "model": {"n": 32}})");
  RunOptions o;
  o.config_path = (dir / "cfg.json").string();
  o.out_dir = (dir / "run").string();
  run_experiment(o);
  int curves = 0, bounds = 0;
  for (const auto& e : fs::directory_iterator(dir / "run")) {
    const auto name = e.path().filename().string();
    if (name.rfind("curve_zeta_", 0) == 0) ++curves;
    if (name.rfind("bound_zeta_", 0) == 0) ++bounds;
  }
  CHECK(curves == 5);
  CHECK(bounds == 5);
  const auto manifest = nlohmann::json::parse(slurp(dir / "run" / "manifest.json"));
  CHECK(manifest["outputs"].size() == 10);
  const auto text = slurp(dir / "run" / "curve_zeta_0.dat");
  CHECK(text.rfind("# delta value", 0) == 0);
}

TEST_CASE("bayes experiment writes rates, fits and decomposition") {
  const auto dir = scratch("bayes");
  write(dir / "cfg.json", R"({"model": {"n": 32}, "n_replicates": 8})");
  RunOptions o;
  o.config_path = (dir / "cfg.json").string();
  o.out_dir = (dir / "run").string();
  o.threads = 2;
  run_experiment(o);
  const auto rates = slurp(dir / "run" / "rates.csv");
  CHECK(rates.rfind("experiment,delta,zeta,mean_error,stderr,n,predicted_exponent,regime", 0) == 0);
  CHECK(fs::exists(dir / "run" / "fits.csv"));
  CHECK(fs::exists(dir / "run" / "decomposition.csv"));
}

TEST_CASE("rates report lists regimes and violated hypotheses") {
  const auto text = rates_report({2.0, 1.01, 2.0, 2.0, 2}, 0.0, 0.1, -3.0, std::nullopt);
  CHECK(text.find("exponent=0.2475") != std::string::npos);
  CHECK(text.find("regime=bayes(ii)") != std::string::npos);
  const auto bad = rates_report({1.0, 1.01, 1.0, 5.0, 2}, 0.0, std::nullopt, -3.0, std::nullopt);
  CHECK(bad.find("warning: t0 < 2t+r violated") != std::string::npos);
}
