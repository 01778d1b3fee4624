#pragma once

// Kernel studies that sweep the qubit count. Probe contexts are the arm
// contexts of trial 0 of the configured environment.

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qntk/analysis.hpp"
#include "qntk/csv.hpp"
#include "qntk/harness.hpp"

namespace qntk {

struct AnalysisConfig {
  std::vector<std::size_t> qubits{3, 5, 10};
  std::size_t layers = 4;
  std::vector<std::string> kernels{"qntk"};  // subset of {"qntk", "cntk"}
  double lambda = 1.0;
  std::size_t contexts = 400;
  std::size_t initializations = 20;
  std::size_t probe_contexts = 10;
  std::size_t gram_contexts = 50;

  void validate() const {
    if (qubits.empty()) throw std::invalid_argument("analysis.qubits is empty");
    for (auto m : qubits)
      if (m < 1 || m > max_qubits()) throw std::invalid_argument("analysis.qubits entry out of range: " + std::to_string(m));
    if (layers < 1) throw std::invalid_argument("analysis.layers must be at least 1");
    if (kernels.empty()) throw std::invalid_argument("analysis.kernels is empty");
    for (const auto& k : kernels)
      if (k != "qntk" && k != "cntk") throw std::invalid_argument("unknown kernel '" + k + "'");
    if (!(lambda > 0)) throw std::invalid_argument("analysis.lambda must be positive");
    if (contexts < 1) throw std::invalid_argument("analysis.contexts must be at least 1");
    if (initializations < 2) throw std::invalid_argument("analysis.initializations must be at least 2");
    if (probe_contexts < 1) throw std::invalid_argument("analysis.probe_contexts must be at least 1");
    if (gram_contexts < 1) throw std::invalid_argument("analysis.gram_contexts must be at least 1");
  }
};

/// The experiment config re-targeted at an m-qubit, `layers`-layer model.
inline ExperimentConfig at_qubits(ExperimentConfig config, std::size_t m, std::size_t layers) {
  config.quantum.num_qubits = m;
  config.quantum.layers = layers;
  return config;
}

inline std::vector<Vec> probe_contexts(const TrialResources& res, std::uint64_t seed, std::size_t count) {
  auto env = res.make_environment(seed, 0);
  std::vector<Vec> xs;
  while (xs.size() < count) {
    const auto r = env->next_round();
    for (const auto& x : r.arm_contexts)
      if (xs.size() < count) xs.push_back(x);
  }
  return xs;
}

struct SpectrumRow {
  std::string kernel;
  std::size_t num_qubits = 0;
  std::size_t params = 0;
  double effective_dimension = 0.0;
  double lambda = 0.0;
};

inline std::vector<SpectrumRow> kernel_spectrum(const ExperimentConfig& config, const AnalysisConfig& analysis) {
  std::vector<SpectrumRow> rows;
  for (const auto& kernel : analysis.kernels) {
    for (auto m : analysis.qubits) {
      const auto cfg = at_qubits(config, m, analysis.layers);
      TrialResources res(cfg);
      const auto xs = probe_contexts(res, cfg.base_seed, analysis.contexts);
      SpectrumRow row{kernel, m, 0, 0.0, analysis.lambda};
      if (kernel == "qntk") {
        const auto phi = res.qntk_features(0);
        row.params = phi->dim();
        row.effective_dimension = empirical_effective_dimension(*phi, xs, analysis.lambda);
      } else {
        const CntkFeatureMap phi(res.initial_mlp(0));
        row.params = phi.dim();
        row.effective_dimension = empirical_effective_dimension(phi, xs, analysis.lambda);
      }
      rows.push_back(row);
    }
  }
  return rows;
}

/// Columns: kernel,m,p,effective_dimension,lambda.
inline void write_kernel_spectrum_csv(std::ostream& os, const std::vector<SpectrumRow>& rows) {
  os << "kernel,m,p,effective_dimension,lambda\n";
  for (const auto& r : rows)
    os << r.kernel << ',' << r.num_qubits << ',' << r.params << ',' << format_number(r.effective_dimension) << ','
       << format_number(r.lambda) << '\n';
}

inline std::vector<ConcentrationReport> concentration_study(const ExperimentConfig& config,
                                                            const AnalysisConfig& analysis, std::size_t jobs = 1) {
  std::vector<ConcentrationReport> out;
  const auto seeds = probe_seeds(config.base_seed, analysis.initializations);
  for (auto m : analysis.qubits) {
    const auto cfg = at_qubits(config, m, analysis.layers);
    const TrialResources res(cfg);
    const auto xs = probe_contexts(res, cfg.base_seed, analysis.probe_contexts);
    out.push_back(concentration_probe(build_circuit(cfg.quantum.circuit, m, analysis.layers), xs, seeds, jobs));
  }
  return out;
}

/// QNTK Gram of the configured model (trial 0) on `analysis.gram_contexts` probe contexts.
inline GramMatrix qntk_gram(const ExperimentConfig& config, const AnalysisConfig& analysis) {
  TrialResources res(config);
  const auto xs = probe_contexts(res, config.base_seed, analysis.gram_contexts);
  return gram(*res.qntk_features(0), xs);
}

}  // namespace qntk
