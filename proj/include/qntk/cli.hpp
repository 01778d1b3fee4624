#pragma once

// Command-line front end: run | grid | kernel-spectrum | concentration | gram-dump.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
// Output directory: --out, else the config's output_dir, else
// $QNTK_OUTPUT_DIR, else ./out. Every invocation writes
// <run_id>_<command>_metadata.json next to its CSVs.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "qntk/analysis.hpp"
#include "qntk/config.hpp"
#include "qntk/harness.hpp"
#include "qntk/studies.hpp"

namespace qntk {

inline constexpr std::string_view kVersion = "0.1.0";

inline constexpr std::string_view kSeedScheme =
    "Philox4x32-10; key = base_seed (low, high 32 bits); counter = (block low, block high, trial, role); "
    "roles: environment 0, policy 1, init 2, noise 3, probe 4; all algorithms of a trial share its "
    "environment and noise streams";

namespace cli_detail {

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::size_t jobs = 0;
};

/// Config sections each subcommand reads.
inline std::vector<std::string> honored_sections(const std::string& command) {
  const std::vector<std::string> common{"run_id", "output_dir", "environment", "experiment", "quantum"};
  std::vector<std::string> s = common;
  if (command == "run" || command == "grid") {
    for (const char* k : {"algorithms", "hyperparameters", "neural", "rbf"}) s.emplace_back(k);
    if (command == "grid") s.emplace_back("grid");
  } else {
    s.emplace_back("analysis");
  }
  return s;
}

inline std::string keys_footer(const std::string& command) {
  std::ostringstream os;
  os << "Config keys (JSON file via --config, or --override key=value):\n";
  const auto sections = honored_sections(command);
  for (const auto& [key, value] : config_keys(default_config_document())) {
    const auto top = key.substr(0, key.find('.'));
    if (std::find(sections.begin(), sections.end(), top) == sections.end()) continue;
    os << "  " << key << " = " << value << '\n';
  }
  os << "Default output directory: $QNTK_OUTPUT_DIR, else ./out";
  return os.str();
}

inline std::filesystem::path output_dir(const Options& opt, const ToolConfig& cfg) {
  if (!opt.out_dir.empty()) return opt.out_dir;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv("QNTK_OUTPUT_DIR"); env && *env) return env;
  return "out";
}

class Writer {
 public:
  explicit Writer(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    const auto path = dir_ / name;
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    body(os);
    os.flush();
    if (!os) throw std::runtime_error("failed writing '" + path.string() + "'");
    files_.push_back(name);
  }

  const std::vector<std::string>& files() const { return files_; }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

inline nlohmann::json settings_json(const AlgorithmSettings& s) {
  return {{"lambda", s.lambda}, {"beta", s.beta}, {"theoretical", s.theoretical}};
}

inline int run_command(const std::string& command, const Options& opt, std::ostream& out, std::ostream& err) {
  ToolConfig cfg;
  try {
    cfg = load_config(opt.config_path, opt.overrides);
    if (cfg.experiment.run_id.empty() || cfg.experiment.run_id.find_first_of("/\\") != std::string::npos)
      throw ConfigError("config key 'run_id' must be a nonempty file-name stem");
    if (opt.jobs > 0) cfg.experiment.jobs = opt.jobs;
    if (cfg.experiment.jobs == 0) cfg.experiment.jobs = std::max(1u, std::thread::hardware_concurrency());
    cfg.experiment.validate();
    if (command != "run" && command != "grid") cfg.analysis.validate();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    auto& exp = cfg.experiment;
    Writer w(output_dir(opt, cfg));
    const std::string stem = exp.run_id + "_";
    nlohmann::json meta = {
        {"tool", "qntk"},
        {"version", kVersion},
        {"command", command},
        {"config", cfg.resolved},
        {"config_hash", config_hash(cfg.resolved)},
        {"seed_scheme", kSeedScheme},
        {"base_seed", exp.base_seed},
        {"compiler", __VERSION__},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
    };

    if (command == "run" || command == "grid") {
      TrialResources res(exp);
      if (command == "grid") {
        const auto g = grid_search(exp, res);
        w.write(stem + "grid.csv", [&](std::ostream& os) { write_grid_csv(os, g.rows); });
        nlohmann::json chosen = nlohmann::json::object();
        for (const auto& [a, s] : g.best) {
          exp.settings[a] = s;
          chosen[std::string(algorithm_name(a))] = settings_json(s);
          const auto& row = g.best_row.at(a);
          out << algorithm_name(a) << ": best lambda=" << format_number(row.lambda)
              << " beta=" << format_number(row.beta) << " grid mean R_T=" << format_number(row.mean_final_regret)
              << '\n';
        }
        meta["hyperparameter_selection"] = "grid-best (lambda, beta) per algorithm";
        meta["selected"] = chosen;
      } else {
        meta["hyperparameter_selection"] = "config";
      }
      const auto r = run_experiment(exp, res);
      w.write(stem + "trace.csv", [&](std::ostream& os) { write_trace_csv(os, exp.run_id, r.traces); });
      w.write(stem + "summary.csv", [&](std::ostream& os) { write_summary_csv(os, r.summaries); });
      nlohmann::json finals = nlohmann::json::object();
      for (const auto& s : r.summaries) {
        finals[std::string(algorithm_name(s.algorithm))] = {{"mean", s.mean.back()}, {"stderr", s.stderr_.back()}};
        out << algorithm_name(s.algorithm) << ": R_T = " << format_number(s.mean.back()) << " +- "
            << format_number(s.stderr_.back()) << '\n';
      }
      meta["final_regret"] = finals;
    } else if (command == "kernel-spectrum") {
      const auto rows = kernel_spectrum(exp, cfg.analysis);
      w.write(stem + "kernel_spectrum.csv", [&](std::ostream& os) { write_kernel_spectrum_csv(os, rows); });
      for (const auto& r : rows)
        out << r.kernel << " m=" << r.num_qubits << " p=" << r.params
            << " effective_dimension=" << format_number(r.effective_dimension) << '\n';
    } else if (command == "concentration") {
      const auto reports = concentration_study(exp, cfg.analysis, exp.jobs);
      w.write(stem + "concentration.csv", [&](std::ostream& os) { write_concentration_csv(os, reports); });
      nlohmann::json all = nlohmann::json::array();
      for (const auto& r : reports) {
        all.push_back(to_json(r));
        out << "m=" << r.num_qubits << " L=" << r.layers << " mean_deviation=" << format_number(r.mean_deviation)
            << '\n';
      }
      w.write(stem + "concentration.json", [&](std::ostream& os) { os << all.dump(2) << '\n'; });
      meta["probe_seeds"] = probe_seeds(exp.base_seed, cfg.analysis.initializations);
    } else if (command == "gram-dump") {
      const auto g = qntk_gram(exp, cfg.analysis);
      const auto rep = spectrum_report(g, cfg.analysis.lambda);
      w.write(stem + "gram.csv", [&](std::ostream& os) { write_gram_csv(os, g); });
      w.write(stem + "gram_spectrum.csv", [&](std::ostream& os) { write_spectrum_csv(os, rep); });
      meta["spectrum"] = to_json(rep);
      out << "contexts=" << g.size() << " effective_dimension=" << format_number(rep.effective_dimension) << '\n';
    }

    meta["outputs"] = w.files();
    const std::string meta_name = stem + command + "_metadata.json";
    w.write(meta_name, [&](std::ostream& os) { os << meta.dump(2) << '\n'; });
    out << "wrote " << w.files().size() << " files to " << w.dir().string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace cli_detail

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Contextual bandit experiments with quantum and classical neural tangent kernels"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  cli_detail::Options opt;
  std::string chosen;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"run", "Run every configured algorithm for experiment.trials trials"},
      {"grid", "Grid-search (lambda, beta) per algorithm, then run the best cell"},
      {"kernel-spectrum", "Empirical effective dimension per qubit count"},
      {"concentration", "QNTK deviation across random initializations per qubit count"},
      {"gram-dump", "Write the QNTK Gram matrix of probe contexts"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", opt.config_path, "JSON config file (defaults apply to missing keys)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    sub->add_option("-s,--override", opt.overrides, "Set a config key: dotted.key=value (repeatable, last wins)");
    sub->add_option("-o,--out", opt.out_dir, "Output directory")->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    sub->add_option("-j,--jobs", opt.jobs, "Worker threads (0: all hardware threads)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    sub->footer(cli_detail::keys_footer(name));
    sub->callback([&chosen, n = name] { chosen = n; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  return cli_detail::run_command(chosen, opt, out, err);
}

}  // namespace qntk
