#pragma once

// One-hidden-layer ReLU network with hand-written reverse-mode gradients
// and Adam. Parameter vector layout: W1 (row-major, width x input), b1, w2, b2.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qntk/rng.hpp"

namespace qntk {

struct MlpModel {
  Eigen::MatrixXd w1;  // width x input_dim
  Eigen::VectorXd b1;
  Eigen::VectorXd w2;
  double b2 = 0.0;

  std::size_t input_dim() const { return static_cast<std::size_t>(w1.cols()); }
  std::size_t width() const { return static_cast<std::size_t>(w1.rows()); }
  std::size_t param_count() const { return width() * (input_dim() + 1) + width() + 1; }

  static MlpModel zeros(std::size_t input_dim, std::size_t width) {
    return {Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(input_dim)),
            Eigen::VectorXd::Zero(static_cast<Eigen::Index>(width)),
            Eigen::VectorXd::Zero(static_cast<Eigen::Index>(width)), 0.0};
  }

  /// Weights ~ N(0, 1/fan_in); biases start at zero.
  static MlpModel gaussian(std::size_t input_dim, std::size_t width, RandomStream& rng) {
    MlpModel m = zeros(input_dim, width);
    const double s1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(width));
    for (Eigen::Index i = 0; i < m.w1.rows(); ++i)
      for (Eigen::Index j = 0; j < m.w1.cols(); ++j) m.w1(i, j) = s1 * rng.normal();
    for (Eigen::Index i = 0; i < m.w2.size(); ++i) m.w2(i) = s2 * rng.normal();
    return m;
  }

  Eigen::VectorXd params() const {
    Eigen::VectorXd p(static_cast<Eigen::Index>(param_count()));
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < w1.rows(); ++i)
      for (Eigen::Index j = 0; j < w1.cols(); ++j) p(k++) = w1(i, j);
    p.segment(k, b1.size()) = b1;
    k += b1.size();
    p.segment(k, w2.size()) = w2;
    k += w2.size();
    p(k) = b2;
    return p;
  }

  void set_params(const Eigen::VectorXd& p) {
    if (static_cast<std::size_t>(p.size()) != param_count()) throw std::invalid_argument("parameter vector size mismatch");
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < w1.rows(); ++i)
      for (Eigen::Index j = 0; j < w1.cols(); ++j) w1(i, j) = p(k++);
    b1 = p.segment(k, b1.size());
    k += b1.size();
    w2 = p.segment(k, w2.size());
    k += w2.size();
    b2 = p(k);
  }
};

/// Largest width w with w * (input_dim + 2) + 1 <= target_p.
inline std::size_t match_width(std::size_t target_p, std::size_t input_dim) {
  if (target_p < input_dim + 3) {
    throw std::invalid_argument("target parameter count " + std::to_string(target_p) +
                                " is too small for a width-1 network on " + std::to_string(input_dim) + " inputs");
  }
  return (target_p - 1) / (input_dim + 2);
}

namespace detail {
inline void check_input(const MlpModel& model, const Eigen::VectorXd& x) {
  if (static_cast<std::size_t>(x.size()) != model.input_dim()) {
    throw std::invalid_argument("input has dimension " + std::to_string(x.size()) + ", network expects " +
                                std::to_string(model.input_dim()));
  }
}
}  // namespace detail

inline double forward(const MlpModel& model, const Eigen::VectorXd& x) {
  detail::check_input(model, x);
  const Eigen::VectorXd hidden = (model.w1 * x + model.b1).cwiseMax(0.0);
  return model.w2.dot(hidden) + model.b2;
}

/// d forward / d params, with the ReLU subgradient taken as 0 at 0.
inline Eigen::VectorXd grad_params(const MlpModel& model, const Eigen::VectorXd& x) {
  detail::check_input(model, x);
  const Eigen::VectorXd pre = model.w1 * x + model.b1;
  const Eigen::Index w = pre.size();
  const Eigen::Index d = x.size();
  Eigen::VectorXd g(static_cast<Eigen::Index>(model.param_count()));
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < w; ++i) {
    const double gate = pre(i) > 0.0 ? model.w2(i) : 0.0;
    g.segment(k, d) = gate * x;
    k += d;
  }
  for (Eigen::Index i = 0; i < w; ++i) g(k++) = pre(i) > 0.0 ? model.w2(i) : 0.0;
  for (Eigen::Index i = 0; i < w; ++i) g(k++) = std::max(pre(i), 0.0);
  g(k) = 1.0;
  return g;
}

struct AdamState {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t step = 0;
  Eigen::VectorXd m;
  Eigen::VectorXd v;

  explicit AdamState(std::size_t params = 0, double learning_rate = 0.01)
      : lr(learning_rate),
        m(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(params))),
        v(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(params))) {}
};

struct Sample {
  Eigen::VectorXd x;
  double reward = 0.0;
};

/// Full-batch gradient of 0.5 * mean((f(x) - r)^2); returns {loss, gradient}.
inline std::pair<double, Eigen::VectorXd> mse_gradient(const MlpModel& model, std::span<const Sample> batch) {
  if (batch.empty()) throw std::invalid_argument("empty training batch");
  const auto n = static_cast<Eigen::Index>(batch.size());
  const auto d = static_cast<Eigen::Index>(model.input_dim());
  Eigen::MatrixXd xs(d, n);
  Eigen::VectorXd r(n);
  for (Eigen::Index s = 0; s < n; ++s) {
    detail::check_input(model, batch[static_cast<std::size_t>(s)].x);
    xs.col(s) = batch[static_cast<std::size_t>(s)].x;
    r(s) = batch[static_cast<std::size_t>(s)].reward;
  }
  const Eigen::MatrixXd pre = (model.w1 * xs).colwise() + model.b1;  // width x n
  const Eigen::MatrixXd hidden = pre.cwiseMax(0.0);
  const Eigen::VectorXd out = (hidden.transpose() * model.w2).array() + model.b2;
  const Eigen::VectorXd resid = (out - r) / static_cast<double>(n);  // d loss / d out
  const double loss = 0.5 * (out - r).squaredNorm() / static_cast<double>(n);

  const Eigen::MatrixXd mask = (pre.array() > 0.0).cast<double>();
  const Eigen::MatrixXd delta = mask.array() * (model.w2 * resid.transpose()).array();  // width x n
  MlpModel grad = MlpModel::zeros(model.input_dim(), model.width());
  grad.w1 = delta * xs.transpose();
  grad.b1 = delta.rowwise().sum();
  grad.w2 = hidden * resid;
  grad.b2 = resid.sum();
  return {loss, grad.params()};
}

/// One Adam step on the full batch; returns the loss before the step.
inline double train_step(MlpModel& model, AdamState& adam, std::span<const Sample> batch) {
  auto [loss, g] = mse_gradient(model, batch);
  if (adam.m.size() != g.size()) {
    adam.m = Eigen::VectorXd::Zero(g.size());
    adam.v = Eigen::VectorXd::Zero(g.size());
  }
  ++adam.step;
  adam.m = adam.beta1 * adam.m + (1 - adam.beta1) * g;
  adam.v = adam.beta2 * adam.v + (1 - adam.beta2) * g.cwiseProduct(g);
  const double c1 = 1 - std::pow(adam.beta1, static_cast<double>(adam.step));
  const double c2 = 1 - std::pow(adam.beta2, static_cast<double>(adam.step));
  const Eigen::VectorXd m_hat = adam.m / c1;
  const Eigen::VectorXd v_hat = adam.v / c2;
  model.set_params(model.params() - (adam.lr * m_hat.array() / (v_hat.array().sqrt() + adam.eps)).matrix());
  return loss;
}

}  // namespace qntk
