#pragma once

// JSON run configuration.
//
// The default document below is also the schema: a config file or an
// override may only set keys that exist in it. Files are merged over the
// defaults, then `--override a.b.c=value` edits are applied in order (the
// value is parsed as JSON and taken as a plain string if that fails).

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qntk/harness.hpp"
#include "qntk/studies.hpp"

namespace qntk {

using nlohmann::json;

/// Raised for problems with the configuration itself rather than with a run.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ToolConfig {
  ExperimentConfig experiment;
  AnalysisConfig analysis;
  std::string output_dir;  // empty: $QNTK_OUTPUT_DIR, else "out"
  json resolved;           // the fully merged document
};

inline json default_config_document() {
  json hyper = json::object();
  for (auto a : kAllAlgorithms)
    hyper[std::string(algorithm_name(a))] = {
        {"lambda", 1.0}, {"beta", 1.0}, {"theoretical", false}, {"nu", 1.0}, {"delta", 0.1}, {"S", 1.0}};
  json algorithms = json::array();
  for (auto a : kAllAlgorithms) algorithms.push_back(std::string(algorithm_name(a)));
  return {
      {"run_id", "run"},
      {"output_dir", ""},
      {"environment",
       {{"name", "gaussian_quantiles"},
        {"dim", 0},
        {"vqe",
         {{"num_qubits", 4},
          {"ansatz_layers", 2},
          {"inner_steps", 5},
          {"inner_lr", 0.1},
          {"c_min", 0.0},
          {"c_max", 2.0},
          {"noise_std", 0.05},
          {"quantum", 1e-6}}}}},
      {"experiment", {{"T", 2000}, {"trials", 30}, {"base_seed", 0}, {"jobs", 0}}},
      {"quantum",
       {{"circuit", "strongly_entangling"},
        {"num_qubits", 5},
        {"layers", 4},
        {"unit_diagonal", false},
        {"calibration_contexts", 64}}},
      {"algorithms", algorithms},
      {"hyperparameters", hyper},
      {"neural", {{"lr", 0.01}, {"train_steps", 10}}},
      {"rbf", {{"bandwidth", 0.0}}},
      {"grid", {{"lambdas", {0.01, 0.1, 1.0}}, {"betas", {0.05, 0.1, 0.5, 1.0, 3.0}}, {"trials", 10}}},
      {"analysis",
       {{"qubits", {3, 5, 10}},
        {"layers", 4},
        {"kernels", {"qntk"}},
        {"lambda", 1.0},
        {"contexts", 400},
        {"initializations", 20},
        {"probe_contexts", 10},
        {"gram_contexts", 50}}},
  };
}

/// Leaf keys of `doc` as (dotted path, default value) pairs; arrays are leaves.
inline std::vector<std::pair<std::string, std::string>> config_keys(const json& doc, const std::string& prefix = "") {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [k, v] : doc.items()) {
    const std::string path = prefix.empty() ? k : prefix + "." + k;
    if (v.is_object()) {
      auto sub = config_keys(v, path);
      out.insert(out.end(), sub.begin(), sub.end());
    } else {
      out.emplace_back(path, v.dump());
    }
  }
  return out;
}

namespace detail {

inline void merge_into(json& base, const json& patch, const std::string& prefix) {
  for (const auto& [k, v] : patch.items()) {
    const std::string path = prefix.empty() ? k : prefix + "." + k;
    if (!base.contains(k)) throw ConfigError("unknown config key '" + path + "'");
    if (base[k].is_object()) {
      if (!v.is_object()) throw ConfigError("config key '" + path + "' must be an object");
      merge_into(base[k], v, path);
    } else {
      base[k] = v;
    }
  }
}

inline const json& at_path(const json& doc, std::string_view path) {
  const json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    node = &node->at(std::string(path.substr(start, dot - start)));
    if (dot == std::string_view::npos) return *node;
    start = dot + 1;
  }
}

inline bool is_count(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

inline std::size_t get_size(const json& doc, std::string_view path) {
  const auto& v = at_path(doc, path);
  if (!is_count(v)) throw ConfigError("config key '" + std::string(path) + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

inline double get_double(const json& doc, std::string_view path) {
  const auto& v = at_path(doc, path);
  if (!v.is_number()) throw ConfigError("config key '" + std::string(path) + "' must be a number");
  return v.get<double>();
}

inline bool get_bool(const json& doc, std::string_view path) {
  const auto& v = at_path(doc, path);
  if (!v.is_boolean()) throw ConfigError("config key '" + std::string(path) + "' must be true or false");
  return v.get<bool>();
}

inline std::string get_string(const json& doc, std::string_view path) {
  const auto& v = at_path(doc, path);
  if (!v.is_string()) throw ConfigError("config key '" + std::string(path) + "' must be a string");
  return v.get<std::string>();
}

inline const json& get_array(const json& doc, std::string_view path) {
  const auto& v = at_path(doc, path);
  if (!v.is_array()) throw ConfigError("config key '" + std::string(path) + "' must be an array");
  return v;
}

}  // namespace detail

/// Applies one "dotted.key=value" override to `doc`.
inline void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(part)) throw ConfigError("unknown config key '" + key + "'");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_object()) throw ConfigError("config key '" + key + "' is a section, not a value");
  *node = std::move(value);
}

/// Converts a merged document into typed configs. Throws ConfigError.
inline ToolConfig to_tool_config(const json& doc) {
  using namespace detail;
  ToolConfig t;
  t.resolved = doc;
  auto& e = t.experiment;
  e.run_id = get_string(doc, "run_id");
  t.output_dir = get_string(doc, "output_dir");
  e.environment = get_string(doc, "environment.name");
  e.gaussian_quantiles.dim = get_size(doc, "environment.dim");
  e.vqe.num_qubits = get_size(doc, "environment.vqe.num_qubits");
  e.vqe.ansatz_layers = get_size(doc, "environment.vqe.ansatz_layers");
  e.vqe.inner_steps = get_size(doc, "environment.vqe.inner_steps");
  e.vqe.inner_lr = get_double(doc, "environment.vqe.inner_lr");
  e.vqe.c_min = get_double(doc, "environment.vqe.c_min");
  e.vqe.c_max = get_double(doc, "environment.vqe.c_max");
  e.vqe.noise_std = get_double(doc, "environment.vqe.noise_std");
  e.vqe.quantum = get_double(doc, "environment.vqe.quantum");
  e.rounds = get_size(doc, "experiment.T");
  e.trials = get_size(doc, "experiment.trials");
  e.base_seed = get_size(doc, "experiment.base_seed");
  e.jobs = get_size(doc, "experiment.jobs");
  e.quantum.circuit = get_string(doc, "quantum.circuit");
  e.quantum.num_qubits = get_size(doc, "quantum.num_qubits");
  e.quantum.layers = get_size(doc, "quantum.layers");
  e.quantum.unit_diagonal = get_bool(doc, "quantum.unit_diagonal");
  e.quantum.calibration_contexts = get_size(doc, "quantum.calibration_contexts");

  e.algorithms.clear();
  for (const auto& name : get_array(doc, "algorithms")) {
    if (!name.is_string()) throw ConfigError("config key 'algorithms' must list algorithm names");
    try {
      e.algorithms.push_back(parse_algorithm(name.get<std::string>()));
    } catch (const std::invalid_argument& err) {
      throw ConfigError(std::string("config key 'algorithms': ") + err.what());
    }
  }
  for (auto a : kAllAlgorithms) {
    const std::string base = "hyperparameters." + std::string(algorithm_name(a)) + ".";
    AlgorithmSettings s;
    s.lambda = get_double(doc, base + "lambda");
    s.beta = get_double(doc, base + "beta");
    s.theoretical = get_bool(doc, base + "theoretical");
    s.radius.nu = get_double(doc, base + "nu");
    s.radius.delta = get_double(doc, base + "delta");
    s.radius.norm_bound = get_double(doc, base + "S");
    e.settings[a] = s;
  }
  e.neural_lr = get_double(doc, "neural.lr");
  e.neural_train_steps = get_size(doc, "neural.train_steps");
  e.rbf_bandwidth = get_double(doc, "rbf.bandwidth");

  auto doubles = [&](std::string_view path) {
    std::vector<double> v;
    for (const auto& x : get_array(doc, path)) {
      if (!x.is_number()) throw ConfigError("config key '" + std::string(path) + "' must list numbers");
      v.push_back(x.get<double>());
    }
    return v;
  };
  e.grid.lambdas = doubles("grid.lambdas");
  e.grid.betas = doubles("grid.betas");
  e.grid.trials = get_size(doc, "grid.trials");

  auto& an = t.analysis;
  an.qubits.clear();
  for (const auto& x : get_array(doc, "analysis.qubits")) {
    if (!is_count(x)) throw ConfigError("config key 'analysis.qubits' must list positive integers");
    an.qubits.push_back(x.get<std::size_t>());
  }
  an.layers = get_size(doc, "analysis.layers");
  an.kernels.clear();
  for (const auto& x : get_array(doc, "analysis.kernels")) {
    if (!x.is_string()) throw ConfigError("config key 'analysis.kernels' must list kernel names");
    an.kernels.push_back(x.get<std::string>());
  }
  an.lambda = get_double(doc, "analysis.lambda");
  an.contexts = get_size(doc, "analysis.contexts");
  an.initializations = get_size(doc, "analysis.initializations");
  an.probe_contexts = get_size(doc, "analysis.probe_contexts");
  an.gram_contexts = get_size(doc, "analysis.gram_contexts");
  return t;
}

/// Defaults, then the file at `path` (if nonempty), then overrides in order.
/// Does not run semantic validation.
inline ToolConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  json doc = default_config_document();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    json file;
    try {
      file = json::parse(buf.str());
    } catch (const json::parse_error& err) {
      throw ConfigError("config file '" + path + "': " + err.what());
    }
    if (!file.is_object()) throw ConfigError("config file '" + path + "' must hold a JSON object");
    detail::merge_into(doc, file, "");
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return to_tool_config(doc);
}

/// FNV-1a of the canonical (sorted-key, compact) dump of the resolved config.
inline std::string config_hash(const json& resolved) { return hex64(fnv1a64(resolved.dump())); }

}  // namespace qntk
