#pragma once

// Benchmark reward generators. Each round emits K unit-norm arm contexts
// together with the hidden mean rewards used for regret accounting; the
// policy only ever sees the contexts and the reward of the arm it pulls.

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qntk/circuits.hpp"
#include "qntk/features.hpp"
#include "qntk/rng.hpp"
#include "qntk/statevector.hpp"

namespace qntk {

struct RoundData {
  std::vector<Vec> arm_contexts;
  std::vector<double> hidden_means;
  std::size_t optimal_arm = 0;
  double optimal_mean = 0.0;
};

/// Lowest-index argmax of the hidden means.
inline std::size_t best_arm(const std::vector<double>& means) {
  if (means.empty()) throw std::invalid_argument("no arms");
  std::size_t best = 0;
  for (std::size_t a = 1; a < means.size(); ++a)
    if (means[a] > means[best]) best = a;
  return best;
}

/// K-block disjoint encoding: arm a gets `x` in block a and zeros elsewhere.
inline std::vector<Vec> disjoint_encode(const Vec& x, std::size_t arms) {
  std::vector<Vec> out;
  const auto d = x.size();
  for (std::size_t a = 0; a < arms; ++a) {
    Vec v = Vec::Zero(d * static_cast<Eigen::Index>(arms));
    v.segment(static_cast<Eigen::Index>(a) * d, d) = x;
    out.push_back(std::move(v));
  }
  return out;
}

class Environment {
 public:
  virtual ~Environment() = default;
  virtual std::size_t num_arms() const = 0;
  virtual std::size_t context_dim() const = 0;
  virtual RoundData next_round() = 0;
  /// Observed reward of `arm`; draws from the noise stream exactly once per call.
  virtual double reward(const RoundData& round, std::size_t arm) = 0;
};

inline double chi_square_median(std::size_t dof) {
  if (dof == 0) throw std::invalid_argument("chi-square needs at least one degree of freedom");
  return boost::math::median(boost::math::chi_squared_distribution<double>(static_cast<double>(dof)));
}

struct GaussQuantilesConfig {
  std::size_t dim = 5;  // per-arm context dimension; raw Gaussian dimension is dim - 1
};

/// Two-class Gaussian-quantiles task. A raw x ~ N(0, I_{d-1}) has label 1
/// iff |x|^2 > tau (chi-square median). The context is the unit vector
/// [x, sqrt(tau)] / sqrt(|x|^2 + tau), which keeps the radius recoverable,
/// and is disjoint-encoded into two arms. Reward is the indicator that the
/// pulled arm equals the label.
class GaussQuantilesEnv final : public Environment {
 public:
  GaussQuantilesEnv(GaussQuantilesConfig config, std::uint64_t seed, std::uint64_t trial)
      : config_(config), rng_(seed, trial, StreamRole::kEnvironment) {
    if (config_.dim < 2) throw std::invalid_argument("Gaussian-quantiles context dimension must be at least 2");
    tau_ = chi_square_median(config_.dim - 1);
  }

  std::size_t num_arms() const override { return 2; }
  std::size_t context_dim() const override { return 2 * config_.dim; }
  std::size_t raw_dim() const { return config_.dim - 1; }
  double threshold() const { return tau_; }

  int label_for(double squared_norm) const { return squared_norm > tau_ ? 1 : 0; }
  int label(const Vec& raw) const { return label_for(raw.squaredNorm()); }

  Vec lift(const Vec& raw) const {
    Vec v(raw.size() + 1);
    v.head(raw.size()) = raw;
    v(raw.size()) = std::sqrt(tau_);
    return v / std::sqrt(raw.squaredNorm() + tau_);
  }

  RoundData round_from_raw(const Vec& raw) const {
    if (static_cast<std::size_t>(raw.size()) != raw_dim()) throw std::invalid_argument("raw context has wrong dimension");
    RoundData r;
    r.arm_contexts = disjoint_encode(lift(raw), 2);
    const int y = label(raw);
    r.hidden_means = {y == 0 ? 1.0 : 0.0, y == 1 ? 1.0 : 0.0};
    r.optimal_arm = static_cast<std::size_t>(y);
    r.optimal_mean = 1.0;
    return r;
  }

  Vec draw_raw() {
    Vec x(static_cast<Eigen::Index>(raw_dim()));
    for (auto& v : x) v = rng_.normal();
    return x;
  }

  RoundData next_round() override { return round_from_raw(draw_raw()); }

  double reward(const RoundData& round, std::size_t arm) override { return round.hidden_means.at(arm); }

 private:
  GaussQuantilesConfig config_;
  RandomStream rng_;
  double tau_ = 0.0;
};

struct VqeConfig {
  std::size_t num_qubits = 4;
  std::size_t ansatz_layers = 2;
  std::size_t inner_steps = 5;
  double inner_lr = 0.1;
  double c_min = 0.0;
  double c_max = 2.0;
  double noise_std = 0.05;
  double quantum = 1e-6;
};

/// Candidate initial states: |0000>, |1111>, |+>^m, GHZ, |0101...>.
inline std::vector<Statevector> vqe_arm_states(std::size_t m) {
  const std::size_t dim = std::size_t{1} << m;
  std::vector<Statevector> s;
  s.push_back(Statevector::basis(m, 0));
  s.push_back(Statevector::basis(m, dim - 1));
  s.push_back(Statevector(m, std::vector<cplx>(dim, cplx(1.0 / std::sqrt(static_cast<double>(dim)), 0))));
  std::vector<cplx> ghz(dim, cplx(0, 0));
  ghz.front() = ghz.back() = cplx(std::sqrt(0.5), 0);
  s.push_back(Statevector(m, ghz));
  std::size_t alt = 0;
  for (std::size_t q = 0; q < m; ++q)
    if (q % 2 == 1) alt |= std::size_t{1} << (m - 1 - q);
  s.push_back(Statevector::basis(m, alt));
  return s;
}

/// psi(c) = [1, c, c^2, cos(pi c / 2)] normalized.
inline Vec vqe_featurize(double c) {
  Vec v(4);
  v << 1.0, c, c * c, std::cos(std::numbers::pi * c / 2);
  return v.normalized();
}

/// Memoized -E_final per (arm, quantized c). Safe to share across threads
/// and environment instances built from the same VqeConfig.
class VqeMeanCache {
 public:
  explicit VqeMeanCache(VqeConfig config)
      : config_(config), states_(vqe_arm_states(config.num_qubits)), ansatz_(build_hea(config.num_qubits, config.ansatz_layers)) {}

  const VqeConfig& config() const { return config_; }
  std::size_t num_arms() const { return states_.size(); }
  const Statevector& state(std::size_t arm) const { return states_.at(arm); }

  double mean(std::size_t arm, double c) {
    const auto key = std::make_pair(arm, std::llround(c / config_.quantum));
    {
      std::lock_guard lock(mutex_);
      if (auto it = values_.find(key); it != values_.end()) return it->second;
    }
    const double v =
        -vqe_optimize(states_.at(arm), ising(c, config_.num_qubits), ansatz_, config_.inner_steps, config_.inner_lr);
    std::lock_guard lock(mutex_);
    values_.emplace(key, v);
    return v;
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return values_.size();
  }

 private:
  VqeConfig config_;
  std::vector<Statevector> states_;
  CircuitSpec ansatz_;
  mutable std::mutex mutex_;
  std::map<std::pair<std::size_t, long long>, double> values_;
};

/// VQE initial-state recommendation: field strength c ~ U[c_min, c_max]
/// (quantized), arm a = initial state a, reward = -E_final + N(0, sigma^2).
class VqeEnv final : public Environment {
 public:
  VqeEnv(std::shared_ptr<VqeMeanCache> cache, std::uint64_t seed, std::uint64_t trial)
      : cache_(std::move(cache)), rng_(seed, trial, StreamRole::kEnvironment), noise_(seed, trial, StreamRole::kNoise) {
    const auto& c = cache_->config();
    if (!(c.c_max >= c.c_min)) throw std::invalid_argument("c_max must be at least c_min");
    if (!(c.noise_std >= 0)) throw std::invalid_argument("noise_std must be non-negative");
    if (!(c.quantum > 0)) throw std::invalid_argument("quantization step must be positive");
  }

  VqeEnv(VqeConfig config, std::uint64_t seed, std::uint64_t trial)
      : VqeEnv(std::make_shared<VqeMeanCache>(config), seed, trial) {}

  std::size_t num_arms() const override { return cache_->num_arms(); }
  std::size_t context_dim() const override { return 4 * num_arms(); }
  const VqeMeanCache& cache() const { return *cache_; }

  double quantize(double c) const {
    const double q = cache_->config().quantum;
    return static_cast<double>(std::llround(c / q)) * q;
  }

  RoundData round_at(double c) const {
    c = quantize(c);
    RoundData r;
    r.arm_contexts = disjoint_encode(vqe_featurize(c), num_arms());
    for (std::size_t a = 0; a < num_arms(); ++a) r.hidden_means.push_back(cache_->mean(a, c));
    r.optimal_arm = best_arm(r.hidden_means);
    r.optimal_mean = r.hidden_means[r.optimal_arm];
    return r;
  }

  RoundData next_round() override {
    const auto& cfg = cache_->config();
    return round_at(rng_.uniform(cfg.c_min, cfg.c_max));
  }

  double reward(const RoundData& round, std::size_t arm) override {
    const double xi = noise_.normal(0.0, cache_->config().noise_std);
    return round.hidden_means.at(arm) + xi;
  }

 private:
  std::shared_ptr<VqeMeanCache> cache_;
  RandomStream rng_;
  RandomStream noise_;
};

}  // namespace qntk
