#pragma once

// Experiment orchestration: seeded trials, aggregation, grid search and
// CSV artifacts.
//
// Seed scheme: trial i of an experiment with base seed s draws every random
// number from Philox4x32-10 streams keyed by s with counter words
// (block, i, role). Environment contexts use role env, reward noise role
// noise, model initializations role init. All algorithms of trial i see the
// same environment and noise streams, so comparisons are paired.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "qntk/bandit.hpp"
#include "qntk/circuits.hpp"
#include "qntk/csv.hpp"
#include "qntk/environments.hpp"
#include "qntk/features.hpp"
#include "qntk/mlp.hpp"
#include "qntk/rng.hpp"

namespace qntk {

enum class Algorithm { kQntkUcb, kNeuralUcb, kCntkUcb, kRbfUcb };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::kQntkUcb, Algorithm::kNeuralUcb, Algorithm::kCntkUcb,
                                               Algorithm::kRbfUcb};

inline std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kQntkUcb: return "qntk_ucb";
    case Algorithm::kNeuralUcb: return "neural_ucb";
    case Algorithm::kCntkUcb: return "cntk_ucb";
    case Algorithm::kRbfUcb: return "rbf_ucb";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view name) {
  for (auto a : kAllAlgorithms)
    if (algorithm_name(a) == name) return a;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

struct AlgorithmSettings {
  double lambda = 1.0;
  double beta = 1.0;
  bool theoretical = false;  // use the confidence-radius formula instead of beta
  TheoreticalExploration radius;

  PolicyConfig policy() const {
    PolicyConfig c;
    c.lambda = lambda;
    if (theoretical) {
      c.exploration = radius;
    } else {
      c.exploration = FixedExploration{beta};
    }
    return c;
  }
};

struct QuantumModelConfig {
  std::string circuit = "strongly_entangling";
  std::size_t num_qubits = 5;
  std::size_t layers = 4;
  bool unit_diagonal = false;  // N_K = mean |grad|^2 instead of p
  std::size_t calibration_contexts = 64;
};

struct GridConfig {
  std::vector<double> lambdas{0.01, 0.1, 1.0};
  std::vector<double> betas{0.05, 0.1, 0.5, 1.0, 3.0};
  std::size_t trials = 10;
};

struct ExperimentConfig {
  std::string run_id = "run";
  std::string environment = "gaussian_quantiles";  // or "vqe"
  GaussQuantilesConfig gaussian_quantiles{0};      // dim 0: use quantum.num_qubits
  VqeConfig vqe;
  QuantumModelConfig quantum;
  std::vector<Algorithm> algorithms{std::begin(kAllAlgorithms), std::end(kAllAlgorithms)};
  std::map<Algorithm, AlgorithmSettings> settings;
  double neural_lr = 0.01;
  std::size_t neural_train_steps = 10;
  double rbf_bandwidth = 0.0;  // 0: sqrt(context dimension)
  std::size_t rounds = 2000;
  std::size_t trials = 30;
  std::uint64_t base_seed = 0;
  GridConfig grid;
  std::size_t jobs = 1;

  AlgorithmSettings settings_for(Algorithm a) const {
    auto it = settings.find(a);
    return it == settings.end() ? AlgorithmSettings{} : it->second;
  }

  void validate() const {
    if (rounds < 1) throw std::invalid_argument("T must be at least 1");
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    if (algorithms.empty()) throw std::invalid_argument("algorithm list is empty");
    if (environment != "gaussian_quantiles" && environment != "vqe")
      throw std::invalid_argument("unknown environment '" + environment + "'");
    if (grid.lambdas.empty() || grid.betas.empty()) throw std::invalid_argument("grid sets must be nonempty");
    if (grid.trials < 1) throw std::invalid_argument("grid trials must be at least 1");
    if (!(neural_lr >= 0)) throw std::invalid_argument("neural learning rate must be non-negative");
    if (!(rbf_bandwidth >= 0)) throw std::invalid_argument("RBF bandwidth must be non-negative");
    for (auto a : algorithms) settings_for(a).policy().validate();
    build_circuit(quantum.circuit, quantum.num_qubits, quantum.layers).validate();
  }
};

struct RegretTrace {
  Algorithm algorithm = Algorithm::kQntkUcb;
  std::size_t trial = 0;
  std::vector<double> instantaneous;
  std::vector<double> cumulative;

  double final_regret() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

/// The bandit loop. The policy sees arm contexts and the chosen arm's
/// reward only; hidden means are used for regret accounting.
inline RegretTrace play(Environment& env, Policy& policy, std::size_t rounds) {
  RegretTrace tr;
  tr.instantaneous.reserve(rounds);
  tr.cumulative.reserve(rounds);
  double cum = 0;
  for (std::size_t t = 0; t < rounds; ++t) {
    const RoundData round = env.next_round();
    const std::size_t arm = policy.select(round.arm_contexts).arm;
    if (arm >= round.arm_contexts.size()) throw std::out_of_range("policy chose a nonexistent arm");
    policy.observe(arm, env.reward(round, arm));
    const double r = std::max(round.optimal_mean - round.hidden_means[arm], 0.0);
    cum += r;
    tr.instantaneous.push_back(r);
    tr.cumulative.push_back(cum);
  }
  return tr;
}

/// Per-experiment shared state: frozen QNTK maps per trial (identical theta0
/// for every grid cell of a trial) and the VQE hidden-mean cache.
class TrialResources {
 public:
  explicit TrialResources(const ExperimentConfig& config) : config_(config) {
    if (config_.environment == "vqe") vqe_cache_ = std::make_shared<VqeMeanCache>(config_.vqe);
  }

  std::size_t context_dim() const {
    return config_.environment == "vqe" ? 4 * vqe_arm_states(config_.vqe.num_qubits).size()
                                        : 2 * gq_config().dim;
  }

  GaussQuantilesConfig gq_config() const {
    GaussQuantilesConfig c = config_.gaussian_quantiles;
    if (c.dim == 0) c.dim = config_.quantum.num_qubits;
    return c;
  }

  std::unique_ptr<Environment> make_environment(std::uint64_t seed, std::size_t trial) const {
    if (config_.environment == "vqe") return std::make_unique<VqeEnv>(vqe_cache_, seed, trial);
    return std::make_unique<GaussQuantilesEnv>(gq_config(), seed, trial);
  }

  std::shared_ptr<const QntkFeatureMap> qntk_features(std::size_t trial) {
    std::lock_guard lock(mutex_);
    auto& slot = qntk_[trial];
    if (!slot) slot = build_qntk(trial);
    return slot;
  }

  MlpModel initial_mlp(std::size_t trial) const {
    const std::size_t d = context_dim();
    const std::size_t pq = build_circuit(config_.quantum.circuit, config_.quantum.num_qubits, config_.quantum.layers)
                               .num_trainable;
    RandomStream rng(config_.base_seed, trial, StreamRole::kInit);
    rng.seek(1ull << 32);  // disjoint from the QNTK initialization draws
    return MlpModel::gaussian(d, match_width(pq, d), rng);
  }

  double rbf_bandwidth() const {
    return config_.rbf_bandwidth > 0 ? config_.rbf_bandwidth : std::sqrt(static_cast<double>(context_dim()));
  }

 private:
  std::shared_ptr<const QntkFeatureMap> build_qntk(std::size_t trial) const {
    const auto& q = config_.quantum;
    RandomStream rng(config_.base_seed, trial, StreamRole::kInit);
    auto model = std::make_shared<const QnnModel>(
        QnnModel::random_init(build_circuit(q.circuit, q.num_qubits, q.layers), rng));
    if (!q.unit_diagonal) return std::make_shared<const QntkFeatureMap>(model);
    // Calibration contexts come from an environment on the probe seed lane,
    // never from the trial's own stream.
    auto probe_env = make_environment(config_.base_seed ^ 0x9e3779b97f4a7c15ull, trial);
    std::vector<Vec> xs;
    while (xs.size() < q.calibration_contexts) {
      const auto r = probe_env->next_round();
      xs.insert(xs.end(), r.arm_contexts.begin(), r.arm_contexts.end());
    }
    const QntkFeatureMap raw(model, 1.0);
    return std::make_shared<const QntkFeatureMap>(model, QntkFeatureMap::unit_diagonal_nk(raw, xs));
  }

  ExperimentConfig config_;
  std::shared_ptr<VqeMeanCache> vqe_cache_;
  std::mutex mutex_;
  std::map<std::size_t, std::shared_ptr<const QntkFeatureMap>> qntk_;
};

inline std::unique_ptr<Policy> make_policy(const ExperimentConfig& config, TrialResources& res, Algorithm algorithm,
                                           const AlgorithmSettings& settings, std::size_t trial) {
  const PolicyConfig pc = settings.policy();
  switch (algorithm) {
    case Algorithm::kQntkUcb: return std::make_unique<LinearUcbPolicy>(res.qntk_features(trial), pc);
    case Algorithm::kCntkUcb:
      return std::make_unique<LinearUcbPolicy>(std::make_shared<const CntkFeatureMap>(res.initial_mlp(trial)), pc);
    case Algorithm::kNeuralUcb:
      return std::make_unique<NeuralUcbPolicy>(res.initial_mlp(trial), pc, config.neural_lr, config.neural_train_steps);
    case Algorithm::kRbfUcb: return std::make_unique<KernelUcbPolicy>(make_rbf(res.rbf_bandwidth()), pc);
  }
  throw std::invalid_argument("unknown algorithm");
}

inline RegretTrace run_trial(const ExperimentConfig& config, TrialResources& res, Algorithm algorithm,
                             const AlgorithmSettings& settings, std::size_t trial) {
  auto env = res.make_environment(config.base_seed, trial);
  auto policy = make_policy(config, res, algorithm, settings, trial);
  auto tr = play(*env, *policy, config.rounds);
  tr.algorithm = algorithm;
  tr.trial = trial;
  return tr;
}

inline RegretTrace run_trial(const ExperimentConfig& config, Algorithm algorithm, std::size_t trial) {
  TrialResources res(config);
  return run_trial(config, res, algorithm, config.settings_for(algorithm), trial);
}

/// Runs fn(0..count-1) on up to `jobs` threads; each index runs exactly once.
inline void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
  }
  if (error) std::rethrow_exception(error);
}

struct RegretSummary {
  Algorithm algorithm = Algorithm::kQntkUcb;
  std::vector<double> mean;
  std::vector<double> stderr_;  // sample std / sqrt(n); 0 for a single trial
};

inline RegretSummary summarize(Algorithm algorithm, std::span<const RegretTrace> traces) {
  if (traces.empty()) throw std::invalid_argument("no traces to summarize");
  const std::size_t T = traces.front().cumulative.size();
  const double n = static_cast<double>(traces.size());
  RegretSummary s{algorithm, std::vector<double>(T, 0.0), std::vector<double>(T, 0.0)};
  for (std::size_t t = 0; t < T; ++t) {
    double sum = 0;
    for (const auto& tr : traces) sum += tr.cumulative.at(t);
    const double mean = sum / n;
    double ss = 0;
    for (const auto& tr : traces) ss += (tr.cumulative[t] - mean) * (tr.cumulative[t] - mean);
    s.mean[t] = mean;
    s.stderr_[t] = traces.size() > 1 ? std::sqrt(ss / (n - 1)) / std::sqrt(n) : 0.0;
  }
  return s;
}

struct ExperimentResult {
  std::vector<RegretTrace> traces;  // algorithm-major, then trial
  std::vector<RegretSummary> summaries;
};

inline ExperimentResult run_experiment(const ExperimentConfig& config, TrialResources& res) {
  config.validate();
  const std::size_t A = config.algorithms.size(), N = config.trials;
  ExperimentResult out;
  out.traces.resize(A * N);
  parallel_for(A * N, config.jobs, [&](std::size_t i) {
    const Algorithm a = config.algorithms[i / N];
    out.traces[i] = run_trial(config, res, a, config.settings_for(a), i % N);
  });
  for (std::size_t k = 0; k < A; ++k)
    out.summaries.push_back(
        summarize(config.algorithms[k], std::span<const RegretTrace>(out.traces).subspan(k * N, N)));
  return out;
}

inline ExperimentResult run_experiment(const ExperimentConfig& config) {
  TrialResources res(config);
  return run_experiment(config, res);
}

struct GridRow {
  Algorithm algorithm = Algorithm::kQntkUcb;
  double lambda = 0;
  double beta = 0;
  double mean_final_regret = 0;
  double stderr_ = 0;
};

struct GridResult {
  std::vector<GridRow> rows;                        // algorithm, then lambda, then beta
  std::map<Algorithm, AlgorithmSettings> best;
  std::map<Algorithm, GridRow> best_row;
};

/// Lower mean final regret wins; ties go to smaller beta, then smaller lambda.
inline bool better_cell(const GridRow& a, const GridRow& b) {
  if (a.mean_final_regret != b.mean_final_regret) return a.mean_final_regret < b.mean_final_regret;
  if (a.beta != b.beta) return a.beta < b.beta;
  return a.lambda < b.lambda;
}

inline GridResult grid_search(const ExperimentConfig& config, TrialResources& res) {
  config.validate();
  const auto& g = config.grid;
  const std::size_t A = config.algorithms.size(), L = g.lambdas.size(), B = g.betas.size(), N = g.trials;
  std::vector<double> finals(A * L * B * N);
  parallel_for(finals.size(), config.jobs, [&](std::size_t i) {
    const std::size_t trial = i % N, cell = i / N;
    const Algorithm a = config.algorithms[cell / (L * B)];
    AlgorithmSettings s = config.settings_for(a);
    s.lambda = g.lambdas[(cell / B) % L];
    s.beta = g.betas[cell % B];
    s.theoretical = false;
    finals[i] = run_trial(config, res, a, s, trial).final_regret();
  });
  GridResult out;
  for (std::size_t cell = 0; cell < A * L * B; ++cell) {
    GridRow row{config.algorithms[cell / (L * B)], g.lambdas[(cell / B) % L], g.betas[cell % B], 0, 0};
    double sum = 0, ss = 0;
    for (std::size_t k = 0; k < N; ++k) sum += finals[cell * N + k];
    row.mean_final_regret = sum / static_cast<double>(N);
    for (std::size_t k = 0; k < N; ++k)
      ss += (finals[cell * N + k] - row.mean_final_regret) * (finals[cell * N + k] - row.mean_final_regret);
    row.stderr_ = N > 1 ? std::sqrt(ss / static_cast<double>(N - 1)) / std::sqrt(static_cast<double>(N)) : 0.0;
    out.rows.push_back(row);
    auto it = out.best_row.find(row.algorithm);
    if (it == out.best_row.end() || better_cell(row, it->second)) out.best_row[row.algorithm] = row;
  }
  for (const auto& [a, row] : out.best_row) {
    AlgorithmSettings s = config.settings_for(a);
    s.lambda = row.lambda;
    s.beta = row.beta;
    s.theoretical = false;
    out.best[a] = s;
  }
  return out;
}

inline GridResult grid_search(const ExperimentConfig& config) {
  TrialResources res(config);
  return grid_search(config, res);
}

// CSV artifacts. Rounds are reported 1-based.

inline void write_trace_csv(std::ostream& os, const std::string& run_id, std::span<const RegretTrace> traces) {
  os << "run_id,algorithm,trial,t,inst_regret,cum_regret\n";
  for (const auto& tr : traces)
    for (std::size_t t = 0; t < tr.cumulative.size(); ++t)
      os << run_id << ',' << algorithm_name(tr.algorithm) << ',' << tr.trial << ',' << t + 1 << ','
         << format_number(tr.instantaneous[t]) << ',' << format_number(tr.cumulative[t]) << '\n';
}

inline void write_summary_csv(std::ostream& os, std::span<const RegretSummary> summaries) {
  os << "algorithm,t,mean_cum_regret,stderr\n";
  for (const auto& s : summaries)
    for (std::size_t t = 0; t < s.mean.size(); ++t)
      os << algorithm_name(s.algorithm) << ',' << t + 1 << ',' << format_number(s.mean[t]) << ','
         << format_number(s.stderr_[t]) << '\n';
}

inline void write_grid_csv(std::ostream& os, std::span<const GridRow> rows) {
  os << "algorithm,lambda,beta,mean_final_regret,stderr\n";
  for (const auto& r : rows)
    os << algorithm_name(r.algorithm) << ',' << format_number(r.lambda) << ',' << format_number(r.beta) << ','
       << format_number(r.mean_final_regret) << ',' << format_number(r.stderr_) << '\n';
}

}  // namespace qntk
