#include "hypoinv/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "hypoinv/error.hpp"

namespace hypoinv {

namespace {

using nlohmann::json;

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// nlohmann::json keeps no source positions, so a key path is located by
// scanning for each quoted key in turn after the previous one.
int line_of_path(const std::string& text, const std::vector<std::string>& path) {
  std::size_t pos = 0;
  for (const auto& key : path) {
    const std::string quoted = "\"" + key + "\"";
    std::size_t hit = pos;
    while (true) {
      hit = text.find(quoted, hit);
      if (hit == std::string::npos) return 0;
      std::size_t after = hit + quoted.size();
      while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after]))) ++after;
      if (after < text.size() && text[after] == ':') break;
      hit += quoted.size();
    }
    pos = hit + quoted.size();
  }
  return line_of_offset(text, pos);
}

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& msg) const {
    std::string where;
    for (const auto& p : path) where += (where.empty() ? "" : ".") + p;
    const int line = line_of_path(text_, path);
    throw Error(ErrorCode::config, (line > 0 ? "line " + std::to_string(line) + ": " : std::string()) + where + ": " + msg);
  }

  void check_keys(const json& obj, const std::vector<std::string>& path, const std::set<std::string>& allowed) const {
    if (!obj.is_object()) fail(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!allowed.count(it.key())) {
        auto p = path;
        p.push_back(it.key());
        fail(p, "unknown key");
      }
  }

  template <typename T>
  void get(const json& obj, const std::vector<std::string>& path, const std::string& key, T& out) const {
    if (!obj.contains(key)) return;
    auto p = path;
    p.push_back(key);
    const json& v = obj.at(key);
    try {
      if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) fail(p, "expected a string");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) fail(p, "expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) fail(p, "expected an integer");
        if constexpr (std::is_unsigned_v<T>)
          if (v.is_number_integer() && !v.is_number_unsigned()) fail(p, "expected a non-negative integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) fail(p, "expected a number");
      } else {
        if (!v.is_array()) fail(p, "expected an array");
      }
      out = v.get<T>();
    } catch (const json::exception& e) {
      fail(p, e.what());
    }
  }

 private:
  const std::string& text_;
};

void read_operator(const Reader& rd, const json& obj, const std::vector<std::string>& path, OperatorSpec& op) {
  rd.check_keys(obj, path, {"kind", "order", "phi_amplitude"});
  rd.get(obj, path, "kind", op.kind);
  rd.get(obj, path, "order", op.order);
  rd.get(obj, path, "phi_amplitude", op.phi_amplitude);
  static const std::set<std::string> kinds{"identity", "bessel", "heat", "variable"};
  if (!kinds.count(op.kind)) {
    auto p = path;
    p.push_back("kind");
    rd.fail(p, "unknown operator kind '" + op.kind + "'");
  }
}

void read_model(const Reader& rd, const json& obj, const std::vector<std::string>& path, ModelTemplate& m) {
  rd.check_keys(obj, path, {"d", "n", "s", "forward", "prior"});
  rd.get(obj, path, "d", m.d);
  rd.get(obj, path, "n", m.n);
  rd.get(obj, path, "s", m.s);
  auto sub = [&](const char* key, OperatorSpec& op) {
    if (!obj.contains(key)) return;
    auto p = path;
    p.push_back(key);
    read_operator(rd, obj.at(key), p, op);
  };
  sub("forward", m.forward);
  sub("prior", m.prior);
}

std::vector<double> read_delta_grid(const Reader& rd, const json& v) {
  const std::vector<std::string> path{"delta_grid"};
  if (v.is_array()) {
    std::vector<double> out;
    rd.get(json{{"delta_grid", v}}, {}, "delta_grid", out);
    return out;
  }
  rd.check_keys(v, path, {"start", "stop", "count"});
  double start = 0, stop = 0;
  int count = 0;
  for (const char* k : {"start", "stop", "count"})
    if (!v.contains(k)) rd.fail(path, std::string("missing '") + k + "'");
  rd.get(v, path, "start", start);
  rd.get(v, path, "stop", stop);
  rd.get(v, path, "count", count);
  try {
    return geometric_grid(start, stop, count);
  } catch (const Error& e) {
    rd.fail(path, e.what());
  }
}

json op_json(const OperatorSpec& op) {
  return {{"kind", op.kind}, {"order", op.order}, {"phi_amplitude", op.phi_amplitude}};
}

json model_json(const ModelTemplate& m) {
  return {{"d", m.d}, {"n", m.n}, {"s", m.s}, {"forward", op_json(m.forward)}, {"prior", op_json(m.prior)}};
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::config, "line " + std::to_string(line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1)) +
                                       ": malformed JSON (" + e.what() + ")");
  }
  const Reader rd(text);
  rd.check_keys(root, {}, {"mode", "model", "delta_grid", "zeta_list", "n_replicates", "master_seed", "lattice_sizes",
                           "truth", "threads", "fit", "contraction", "credible", "estimate"});

  RunConfig cfg;
  std::string mode = "bayes";
  rd.get(root, {}, "mode", mode);
  try {
    cfg.experiment = default_config(parse_mode(mode));
  } catch (const Error& e) {
    rd.fail({"mode"}, e.what());
  }
  ExperimentConfig& ex = cfg.experiment;
  if (root.contains("model")) read_model(rd, root.at("model"), {"model"}, ex.model);
  if (root.contains("delta_grid")) ex.delta_grid = read_delta_grid(rd, root.at("delta_grid"));
  rd.get(root, {}, "zeta_list", ex.zeta_list);
  rd.get(root, {}, "n_replicates", ex.n_replicates);
  rd.get(root, {}, "master_seed", ex.master_seed);
  rd.get(root, {}, "lattice_sizes", ex.lattice_sizes);
  rd.get(root, {}, "truth", ex.truth);
  rd.get(root, {}, "threads", ex.threads);
  if (root.contains("fit")) {
    const json& f = root.at("fit");
    rd.check_keys(f, {"fit"}, {"slope_tolerance", "saturation_threshold"});
    rd.get(f, {"fit"}, "slope_tolerance", ex.slope_tolerance);
    rd.get(f, {"fit"}, "saturation_threshold", ex.saturation_threshold);
  }
  if (root.contains("contraction")) {
    const json& c = root.at("contraction");
    rd.check_keys(c, {"contraction"}, {"kappa", "c0", "n_mc"});
    rd.get(c, {"contraction"}, "kappa", ex.kappa);
    rd.get(c, {"contraction"}, "c0", ex.c0);
    if (ex.mode == ExperimentMode::contraction) rd.get(c, {"contraction"}, "n_mc", ex.n_mc);
  }
  if (root.contains("credible")) {
    const json& c = root.at("credible");
    rd.check_keys(c, {"credible"}, {"zeta1", "alpha", "c1", "n_mc"});
    rd.get(c, {"credible"}, "zeta1", ex.zeta1);
    rd.get(c, {"credible"}, "alpha", ex.alpha);
    rd.get(c, {"credible"}, "c1", ex.c1);
    if (ex.mode == ExperimentMode::credible) rd.get(c, {"credible"}, "n_mc", ex.n_mc);
  }
  if (root.contains("estimate")) {
    const json& e = root.at("estimate");
    const std::vector<std::string> p{"estimate"};
    rd.check_keys(e, p, {"model", "delta", "seed", "synth", "data", "trace_index"});
    if (e.contains("model")) read_model(rd, e.at("model"), {"estimate", "model"}, cfg.estimate.model);
    rd.get(e, p, "delta", cfg.estimate.delta);
    rd.get(e, p, "seed", cfg.estimate.seed);
    rd.get(e, p, "synth", cfg.estimate.synth);
    rd.get(e, p, "data", cfg.estimate.data_path);
    rd.get(e, p, "trace_index", cfg.estimate.trace_index);
    if (!(cfg.estimate.delta > 0.0)) rd.fail({"estimate", "delta"}, "must be positive");
    if (cfg.estimate.synth != "prior" && cfg.estimate.synth != "hat" && cfg.estimate.synth != "zero")
      rd.fail({"estimate", "synth"}, "must be prior, hat or zero");
  }

  // Cross-field invariants: report against the most relevant key.
  try {
    ex.validate();
  } catch (const Error& e) {
    const std::string msg = e.what();
    std::vector<std::string> path{"delta_grid"};
    if (msg.find("n_replicates") != std::string::npos) path = {"n_replicates"};
    else if (msg.find("model") != std::string::npos || msg.find("operator") != std::string::npos) path = {"model"};
    else if (msg.find("zeta") != std::string::npos) path = {"zeta_list"};
    else if (msg.find("threads") != std::string::npos) path = {"threads"};
    else if (msg.find("truth") != std::string::npos) path = {"truth"};
    else if (msg.find("c0") != std::string::npos) path = {"contraction", "c0"};
    else if (msg.find("c1") != std::string::npos) path = {"credible", "c1"};
    else if (msg.find("n_mc") != std::string::npos) path = {"n_mc"};
    else if (msg.find("saturation") != std::string::npos) path = {"fit", "saturation_threshold"};
    rd.fail(path, msg);
  }
  return cfg;
}

void apply_overrides(RunConfig& cfg, std::optional<std::uint64_t> seed, std::optional<int> threads) {
  if (seed) {
    cfg.experiment.master_seed = *seed;
    cfg.estimate.seed = *seed;
  }
  if (threads) {
    if (*threads < 1) throw Error(ErrorCode::usage, "--threads must be at least 1");
    cfg.experiment.threads = *threads;
  }
}

std::string config_to_json(const RunConfig& cfg, int indent) {
  const ExperimentConfig& ex = cfg.experiment;
  json j = {
      {"mode", to_string(ex.mode)},
      {"model", model_json(ex.model)},
      {"delta_grid", ex.delta_grid},
      {"zeta_list", ex.zeta_list},
      {"n_replicates", ex.n_replicates},
      {"master_seed", ex.master_seed},
      {"lattice_sizes", ex.lattice_sizes},
      {"truth", ex.truth},
      {"threads", ex.threads},
      {"fit", {{"slope_tolerance", ex.slope_tolerance}, {"saturation_threshold", ex.saturation_threshold}}},
      {"contraction", {{"kappa", ex.kappa}, {"c0", ex.c0}, {"n_mc", ex.n_mc}}},
      {"credible", {{"zeta1", ex.zeta1}, {"alpha", ex.alpha}, {"c1", ex.c1}, {"n_mc", ex.n_mc}}},
      {"estimate",
       {{"model", model_json(cfg.estimate.model)},
        {"delta", cfg.estimate.delta},
        {"seed", cfg.estimate.seed},
        {"synth", cfg.estimate.synth},
        {"data", cfg.estimate.data_path},
        {"trace_index", cfg.estimate.trace_index}}},
  };
  return j.dump(indent);
}

}  // namespace hypoinv
