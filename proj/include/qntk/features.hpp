#pragma once

// Tangent-feature maps (quantum and classical NTK at a frozen
// initialization), the RBF kernel, and Gram matrices over context sets.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <memory>
#include <mutex>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "qntk/circuits.hpp"
#include "qntk/csv.hpp"
#include "qntk/mlp.hpp"

namespace qntk {

using Vec = Eigen::VectorXd;

class FeatureMap {
 public:
  virtual ~FeatureMap() = default;
  virtual std::size_t dim() const = 0;
  virtual Vec operator()(const Vec& x) const = 0;
};

enum class NkMode {
  kParamCount,   // N_K = p
  kUnitDiagonal  // N_K = mean ||grad||^2 over a calibration set
};

/// phi(x) = grad_theta f(x; theta0) / sqrt(N_K), memoized per exact context bytes.
class QntkFeatureMap final : public FeatureMap {
 public:
  explicit QntkFeatureMap(std::shared_ptr<const QnnModel> model)
      : model_(std::move(model)), nk_(static_cast<double>(model_->num_trainable())) {}

  QntkFeatureMap(std::shared_ptr<const QnnModel> model, double nk) : model_(std::move(model)), nk_(nk) {
    if (!(nk_ > 0)) throw std::invalid_argument("N_K must be positive");
  }

  std::size_t dim() const override { return model_->num_trainable(); }
  double nk() const { return nk_; }
  const QnnModel& model() const { return *model_; }

  Vec operator()(const Vec& x) const override {
    std::string key(reinterpret_cast<const char*>(x.data()), sizeof(double) * static_cast<std::size_t>(x.size()));
    {
      std::lock_guard lock(cache_->mutex);
      if (auto it = cache_->values.find(key); it != cache_->values.end()) return it->second;
    }
    Vec phi = raw_gradient(x) / std::sqrt(nk_);
    std::lock_guard lock(cache_->mutex);
    cache_->values.emplace(std::move(key), phi);
    return phi;
  }

  Vec raw_gradient(const Vec& x) const {
    const auto g = model_->gradient(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                                    model_->theta0());
    return Eigen::Map<const Vec>(g.data(), static_cast<Eigen::Index>(g.size()));
  }

  /// Unit-diagonal mode: N_K = mean ||grad f(x)||^2 over the given contexts.
  static double unit_diagonal_nk(const QntkFeatureMap& unscaled, std::span<const Vec> contexts) {
    if (contexts.empty()) throw std::invalid_argument("calibration needs at least one context");
    double acc = 0;
    for (const auto& x : contexts) acc += unscaled.raw_gradient(x).squaredNorm();
    return acc / static_cast<double>(contexts.size());
  }

  std::size_t cache_size() const {
    std::lock_guard lock(cache_->mutex);
    return cache_->values.size();
  }

 private:
  struct Cache {
    std::mutex mutex;
    std::unordered_map<std::string, Vec> values;
  };
  std::shared_ptr<const QnnModel> model_;
  double nk_;
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

/// Frozen classical NTK features: grad_params(mlp0, x) / sqrt(p_c).
class CntkFeatureMap final : public FeatureMap {
 public:
  explicit CntkFeatureMap(MlpModel model) : model_(std::move(model)) {}
  std::size_t dim() const override { return model_.param_count(); }
  Vec operator()(const Vec& x) const override {
    return grad_params(model_, x) / std::sqrt(static_cast<double>(model_.param_count()));
  }
  const MlpModel& model() const { return model_; }

 private:
  MlpModel model_;
};

inline double qntk_inner(const FeatureMap& phi, const Vec& x, const Vec& y) { return phi(x).dot(phi(y)); }

inline Vec qntk_features(const QntkFeatureMap& map, const Vec& x) { return map(x); }

inline double rbf_kernel(const Vec& x, const Vec& y, double bandwidth) {
  if (!(bandwidth > 0)) throw std::invalid_argument("RBF bandwidth must be positive");
  return std::exp(-(x - y).squaredNorm() / (2.0 * bandwidth * bandwidth));
}

using KernelFn = std::function<double(const Vec&, const Vec&)>;

inline KernelFn make_rbf(double bandwidth) {
  if (!(bandwidth > 0)) throw std::invalid_argument("RBF bandwidth must be positive");
  return [bandwidth](const Vec& x, const Vec& y) { return rbf_kernel(x, y, bandwidth); };
}

/// k(x, y) = <phi(x), phi(y)>.
inline KernelFn make_explicit_kernel(std::shared_ptr<const FeatureMap> map) {
  return [map = std::move(map)](const Vec& x, const Vec& y) { return (*map)(x).dot((*map)(y)); };
}

/// Median pairwise distance; falls back to 1 when all contexts coincide.
inline double median_heuristic_bandwidth(std::span<const Vec> contexts) {
  std::vector<double> d;
  for (std::size_t i = 0; i < contexts.size(); ++i)
    for (std::size_t j = i + 1; j < contexts.size(); ++j) d.push_back((contexts[i] - contexts[j]).norm());
  if (d.empty()) return 1.0;
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid > 0 ? *mid : 1.0;
}

struct GramMatrix {
  Eigen::MatrixXd entries;
  std::vector<Vec> contexts;

  std::size_t size() const { return static_cast<std::size_t>(entries.rows()); }
  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(entries, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }
};

inline GramMatrix gram(const FeatureMap& phi, std::span<const Vec> contexts) {
  const auto n = static_cast<Eigen::Index>(contexts.size());
  if (n == 0) throw std::invalid_argument("Gram matrix needs at least one context");
  Eigen::MatrixXd f(static_cast<Eigen::Index>(phi.dim()), n);
  for (Eigen::Index i = 0; i < n; ++i) f.col(i) = phi(contexts[static_cast<std::size_t>(i)]);
  GramMatrix g{Eigen::MatrixXd(n, n), {contexts.begin(), contexts.end()}};
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) g.entries(i, j) = g.entries(j, i) = f.col(i).dot(f.col(j));
  return g;
}

inline GramMatrix gram(const KernelFn& k, std::span<const Vec> contexts) {
  const auto n = static_cast<Eigen::Index>(contexts.size());
  if (n == 0) throw std::invalid_argument("Gram matrix needs at least one context");
  GramMatrix g{Eigen::MatrixXd(n, n), {contexts.begin(), contexts.end()}};
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j)
      g.entries(i, j) = g.entries(j, i) = k(contexts[static_cast<std::size_t>(i)], contexts[static_cast<std::size_t>(j)]);
  return g;
}

/// First line "contexts,<n>", then n rows of n comma-separated entries.
inline void write_gram_csv(std::ostream& os, const GramMatrix& g) {
  os << "contexts," << g.size() << '\n';
  for (Eigen::Index i = 0; i < g.entries.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.entries.cols(); ++j) {
      if (j) os << ',';
      os << format_number(g.entries(i, j));
    }
    os << '\n';
  }
}

}  // namespace qntk
