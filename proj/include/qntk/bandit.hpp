#pragma once

// Upper-confidence-bound arm selection.
//
// Primal form (explicit features phi, dimension p):
//   Z_t = lambda I + sum phi phi^T,  b_t = sum r phi
//   mean(x)     = phi^T Z^{-1} b
//   width_sq(x) = phi^T Z^{-1} phi
//   U(x)        = mean + beta * sqrt(width_sq)
//
// Dual form (kernel k, history X_t, rewards y):
//   mean(x)     = k_t(x)^T (K_t + lambda I)^{-1} y
//   width_sq(x) = (k(x,x) - k_t(x)^T (K_t + lambda I)^{-1} k_t(x)) / lambda
//
// For k(x, y) = <phi(x), phi(y)> both forms give the same mean and width_sq.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qntk/features.hpp"
#include "qntk/mlp.hpp"

namespace qntk {

struct FixedExploration {
  double beta = 1.0;
};

struct TheoreticalExploration {
  double nu = 1.0;
  double delta = 0.1;
  double norm_bound = 1.0;  // S
};

struct PolicyConfig {
  double lambda = 1.0;
  std::variant<FixedExploration, TheoreticalExploration> exploration = FixedExploration{};

  void validate() const {
    if (!(lambda > 0)) throw std::invalid_argument("lambda must be positive");
    if (const auto* f = std::get_if<FixedExploration>(&exploration)) {
      if (!(f->beta >= 0)) throw std::invalid_argument("fixed beta must be non-negative");
    } else {
      const auto& t = std::get<TheoreticalExploration>(exploration);
      if (!(t.delta > 0 && t.delta < 1)) throw std::invalid_argument("delta must lie in (0, 1)");
      if (!(t.nu > 0)) throw std::invalid_argument("nu must be positive");
      if (!(t.norm_bound > 0)) throw std::invalid_argument("S must be positive");
    }
  }

  /// lambda >= max(1, S^-2), assumed by the regret analysis. Violations are allowed.
  bool meets_regret_condition() const {
    const auto* t = std::get_if<TheoreticalExploration>(&exploration);
    if (!t) return true;
    return lambda >= std::max(1.0, 1.0 / (t->norm_bound * t->norm_bound));
  }
};

struct Prediction {
  double mean = 0.0;
  double width_sq = 0.0;
};

struct ArmDecision {
  std::size_t arm = 0;
  std::vector<double> means;
  std::vector<double> widths;  // beta * sqrt(width_sq)
  std::vector<double> ucbs;
};

/// Argmax of mean + beta * sqrt(width_sq); ties go to the lowest index.
inline ArmDecision decide(std::span<const Prediction> preds, double beta) {
  if (preds.empty()) throw std::invalid_argument("arm set is empty");
  ArmDecision d;
  for (std::size_t a = 0; a < preds.size(); ++a) {
    const double w = beta * std::sqrt(std::max(preds[a].width_sq, 0.0));
    d.means.push_back(preds[a].mean);
    d.widths.push_back(w);
    d.ucbs.push_back(preds[a].mean + w);
    if (d.ucbs[a] > d.ucbs[d.arm]) d.arm = a;
  }
  return d;
}

/// Ridge-regression design state with a Sherman-Morrison maintained inverse.
class DesignState {
 public:
  DesignState(std::size_t dim, double lambda, std::size_t refresh_every = 500)
      : lambda_(lambda),
        refresh_every_(refresh_every),
        z_(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)) * lambda),
        z_inv_(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)) / lambda),
        b_(Vec::Zero(static_cast<Eigen::Index>(dim))),
        estimate_(Vec::Zero(static_cast<Eigen::Index>(dim))) {
    if (!(lambda > 0)) throw std::invalid_argument("lambda must be positive");
  }

  std::size_t dim() const { return static_cast<std::size_t>(b_.size()); }
  std::size_t rounds() const { return rounds_; }
  double lambda() const { return lambda_; }
  const Eigen::MatrixXd& z() const { return z_; }
  const Eigen::MatrixXd& z_inv() const { return z_inv_; }
  const Vec& b() const { return b_; }
  /// Z^{-1} b, i.e. the ridge solution relative to the initialization.
  const Vec& estimate() const { return estimate_; }
  /// log det(Z_t) - p log(lambda), accumulated as sum log(1 + width_sq).
  double logdet_ratio() const { return logdet_ratio_; }

  Prediction predict(const Vec& phi) const {
    check(phi);
    return {phi.dot(estimate_), std::max(phi.dot(z_inv_ * phi), 0.0)};
  }

  void update(const Vec& phi, double reward) {
    check(phi);
    const Vec u = z_inv_ * phi;
    const double s = phi.dot(u);
    z_.noalias() += phi * phi.transpose();
    z_inv_.noalias() -= (u * u.transpose()) / (1.0 + s);
    b_ += reward * phi;
    logdet_ratio_ += std::log1p(std::max(s, 0.0));
    ++rounds_;
    if (refresh_every_ > 0 && rounds_ % refresh_every_ == 0) {
      z_inv_ = z_.llt().solve(Eigen::MatrixXd::Identity(z_.rows(), z_.cols()));
      z_inv_ = 0.5 * (z_inv_ + z_inv_.transpose()).eval();
    }
    estimate_.noalias() = z_inv_ * b_;
  }

 private:
  void check(const Vec& phi) const {
    if (phi.size() != b_.size()) {
      throw std::invalid_argument("feature has dimension " + std::to_string(phi.size()) + ", design expects " +
                                  std::to_string(b_.size()));
    }
  }

  double lambda_;
  std::size_t refresh_every_;
  Eigen::MatrixXd z_;
  Eigen::MatrixXd z_inv_;
  Vec b_;
  Vec estimate_;
  double logdet_ratio_ = 0.0;
  std::size_t rounds_ = 0;
};

inline Prediction predict(const DesignState& state, const Vec& phi) { return state.predict(phi); }

/// Fixed beta, or nu * sqrt(logdet ratio + 2 log(1/delta)) + sqrt(lambda) * S.
inline double exploration_radius(double logdet_ratio, const PolicyConfig& config) {
  if (const auto* f = std::get_if<FixedExploration>(&config.exploration)) return f->beta;
  const auto& t = std::get<TheoreticalExploration>(config.exploration);
  return t.nu * std::sqrt(logdet_ratio + 2.0 * std::log(1.0 / t.delta)) + std::sqrt(config.lambda) * t.norm_bound;
}

inline double exploration_radius(const DesignState& state, const PolicyConfig& config) {
  return exploration_radius(state.logdet_ratio(), config);
}

inline ArmDecision select_arm(const DesignState& state, const PolicyConfig& config, std::span<const Vec> arm_features) {
  if (arm_features.empty()) throw std::invalid_argument("arm set is empty");
  std::vector<Prediction> preds;
  preds.reserve(arm_features.size());
  for (const auto& phi : arm_features) preds.push_back(state.predict(phi));
  return decide(preds, exploration_radius(state, config));
}

/// Kernel ridge state with (K_t + lambda I)^{-1} grown by block inversion.
class DualState {
 public:
  DualState(KernelFn kernel, double lambda) : kernel_(std::move(kernel)), lambda_(lambda) {
    if (!(lambda > 0)) throw std::invalid_argument("lambda must be positive");
  }

  std::size_t rounds() const { return history_.size(); }
  double lambda() const { return lambda_; }
  const Eigen::MatrixXd& inverse() const { return inv_; }
  const std::vector<Vec>& history() const { return history_; }
  const Vec& rewards() const { return y_; }
  double logdet_ratio() const { return logdet_ratio_; }

  Prediction predict(const Vec& x) const {
    const double kxx = kernel_(x, x);
    if (history_.empty()) return {0.0, std::max(kxx, 0.0) / lambda_};
    const Vec k = kernel_vector(x);
    const Vec u = inv_ * k;
    return {k.dot(alpha_), std::max(kxx - k.dot(u), 0.0) / lambda_};
  }

  void update(const Vec& x, double reward) {
    const auto n = static_cast<Eigen::Index>(history_.size());
    const double c = kernel_(x, x) + lambda_;
    Eigen::MatrixXd next(n + 1, n + 1);
    if (n == 0) {
      next(0, 0) = 1.0 / c;
      logdet_ratio_ += std::log(c / lambda_);
    } else {
      const Vec k = kernel_vector(x);
      const Vec u = inv_ * k;
      const double schur = std::max(c - k.dot(u), lambda_ * 1e-12);
      next.topLeftCorner(n, n) = inv_ + (u * u.transpose()) / schur;
      next.topRightCorner(n, 1) = -u / schur;
      next.bottomLeftCorner(1, n) = -u.transpose() / schur;
      next(n, n) = 1.0 / schur;
      logdet_ratio_ += std::log(schur / lambda_);
    }
    inv_ = std::move(next);
    history_.push_back(x);
    y_.conservativeResize(n + 1);
    y_(n) = reward;
    alpha_ = inv_ * y_;
  }

 private:
  Vec kernel_vector(const Vec& x) const {
    Vec k(static_cast<Eigen::Index>(history_.size()));
    for (std::size_t i = 0; i < history_.size(); ++i) k(static_cast<Eigen::Index>(i)) = kernel_(history_[i], x);
    return k;
  }

  KernelFn kernel_;
  double lambda_;
  std::vector<Vec> history_;
  Vec y_;
  Vec alpha_;
  Eigen::MatrixXd inv_;
  double logdet_ratio_ = 0.0;
};

inline ArmDecision dual_select(const DualState& state, const PolicyConfig& config, std::span<const Vec> arm_contexts) {
  if (arm_contexts.empty()) throw std::invalid_argument("arm set is empty");
  std::vector<Prediction> preds;
  preds.reserve(arm_contexts.size());
  for (const auto& x : arm_contexts) preds.push_back(state.predict(x));
  return decide(preds, exploration_radius(state.logdet_ratio(), config));
}

// ---------------------------------------------------------------------------
// Policies: the only surface the harness talks to. They see arm contexts and
// the reward of the arm they pulled, nothing else.

class Policy {
 public:
  virtual ~Policy() = default;
  virtual ArmDecision select(std::span<const Vec> arm_contexts) = 0;
  virtual void observe(std::size_t arm, double reward) = 0;
};

/// Primal UCB over a frozen feature map (QNTK-UCB, CNTK-UCB).
class LinearUcbPolicy final : public Policy {
 public:
  LinearUcbPolicy(std::shared_ptr<const FeatureMap> features, PolicyConfig config)
      : features_(std::move(features)), config_(config), state_(features_->dim(), config.lambda) {
    config_.validate();
  }

  ArmDecision select(std::span<const Vec> arm_contexts) override {
    last_.clear();
    for (const auto& x : arm_contexts) last_.push_back((*features_)(x));
    return select_arm(state_, config_, last_);
  }

  void observe(std::size_t arm, double reward) override { state_.update(last_.at(arm), reward); }

  const DesignState& state() const { return state_; }

 private:
  std::shared_ptr<const FeatureMap> features_;
  PolicyConfig config_;
  DesignState state_;
  std::vector<Vec> last_;
};

/// Dual KernelUCB (RBF-Kernel-UCB).
class KernelUcbPolicy final : public Policy {
 public:
  KernelUcbPolicy(KernelFn kernel, PolicyConfig config) : config_(config), state_(std::move(kernel), config.lambda) {
    config_.validate();
  }

  ArmDecision select(std::span<const Vec> arm_contexts) override {
    last_.assign(arm_contexts.begin(), arm_contexts.end());
    return dual_select(state_, config_, arm_contexts);
  }

  void observe(std::size_t arm, double reward) override { state_.update(last_.at(arm), reward); }

  const DualState& state() const { return state_; }

 private:
  PolicyConfig config_;
  DualState state_;
  std::vector<Vec> last_;
};

/// NeuralUCB: gradient features at the current network, J full-batch Adam
/// steps on the whole history after every reward. The design matrix keeps
/// the features as they were logged.
class NeuralUcbPolicy final : public Policy {
 public:
  NeuralUcbPolicy(MlpModel model, PolicyConfig config, double lr, std::size_t train_steps)
      : model_(std::move(model)),
        config_(config),
        adam_(model_.param_count(), lr),
        train_steps_(train_steps),
        state_(model_.param_count(), config.lambda) {
    config_.validate();
  }

  Vec features(const Vec& x) const {
    return grad_params(model_, x) / std::sqrt(static_cast<double>(model_.param_count()));
  }

  ArmDecision select(std::span<const Vec> arm_contexts) override {
    last_contexts_.assign(arm_contexts.begin(), arm_contexts.end());
    last_features_.clear();
    for (const auto& x : arm_contexts) last_features_.push_back(features(x));
    return select_arm(state_, config_, last_features_);
  }

  void observe(std::size_t arm, double reward) override {
    state_.update(last_features_.at(arm), reward);
    history_.push_back({last_contexts_.at(arm), reward});
    for (std::size_t j = 0; j < train_steps_; ++j) train_step(model_, adam_, history_);
  }

  const MlpModel& model() const { return model_; }
  const DesignState& state() const { return state_; }

 private:
  MlpModel model_;
  PolicyConfig config_;
  AdamState adam_;
  std::size_t train_steps_;
  DesignState state_;
  std::vector<Sample> history_;
  std::vector<Vec> last_contexts_;
  std::vector<Vec> last_features_;
};

}  // namespace qntk
