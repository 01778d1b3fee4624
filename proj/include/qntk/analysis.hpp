#pragma once

// Spectral diagnostics for tangent kernels: effective dimension,
// information gain, concentration across initializations and the
// realizability norm of a reward vector.

#include <Eigen/Dense>

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "qntk/circuits.hpp"
#include "qntk/csv.hpp"
#include "qntk/features.hpp"
#include "qntk/rng.hpp"

namespace qntk {

namespace detail {

inline constexpr double kEigenClamp = 1e-8;

/// Eigenvalues in descending order. Values in [-1e-8, 0) are clamped to 0.
inline Eigen::VectorXd clamped_spectrum(const Eigen::MatrixXd& k) {
  if (k.rows() != k.cols()) throw std::invalid_argument("kernel matrix must be square");
  if (k.rows() == 0) return Eigen::VectorXd(0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
  Eigen::VectorXd ev = es.eigenvalues().reverse();
  for (auto& v : ev) {
    if (v < -kEigenClamp) throw std::invalid_argument("kernel matrix is not positive semidefinite");
    v = std::max(v, 0.0);
  }
  return ev;
}

inline void check_lambda(double lambda) {
  if (!(lambda > 0)) throw std::invalid_argument("lambda must be positive");
}

}  // namespace detail

/// gamma = log det(I + K / lambda).
inline double information_gain(const Eigen::MatrixXd& k, double lambda) {
  detail::check_lambda(lambda);
  return detail::clamped_spectrum(k).unaryExpr([lambda](double v) { return std::log1p(v / lambda); }).sum();
}

/// log det(I + K / lambda) / log(1 + n / lambda) with n the matrix size.
inline double effective_dimension(const Eigen::MatrixXd& k, double lambda) {
  detail::check_lambda(lambda);
  if (k.rows() == 0) throw std::invalid_argument("kernel matrix is empty");
  return information_gain(k, lambda) / std::log1p(static_cast<double>(k.rows()) / lambda);
}

inline double effective_dimension(const GramMatrix& k, double lambda) { return effective_dimension(k.entries, lambda); }

struct SpectrumReport {
  Eigen::VectorXd eigenvalues;  // descending
  double logdet = 0.0;
  double effective_dimension = 0.0;
  double min_eigenvalue = 0.0;
  std::size_t contexts = 0;
  double lambda = 1.0;
};

inline SpectrumReport spectrum_report(const GramMatrix& k, double lambda) {
  detail::check_lambda(lambda);
  SpectrumReport r;
  r.eigenvalues = detail::clamped_spectrum(k.entries);
  r.contexts = k.size();
  r.lambda = lambda;
  for (double v : r.eigenvalues) r.logdet += std::log1p(v / lambda);
  r.effective_dimension = r.logdet / std::log1p(static_cast<double>(r.contexts) / lambda);
  r.min_eigenvalue = r.contexts ? r.eigenvalues(r.eigenvalues.size() - 1) : 0.0;
  return r;
}

/// Effective dimension of the single-initialization Gram matrix.
inline double empirical_effective_dimension(const FeatureMap& phi, std::span<const Vec> contexts, double lambda) {
  return effective_dimension(gram(phi, contexts), lambda);
}

struct ConcentrationReport {
  std::size_t initializations = 0;
  std::size_t num_qubits = 0;
  std::size_t layers = 0;
  Eigen::MatrixXd mean_kernel;
  std::vector<double> max_deviation;  // per init: max_ij |K_r - mean|
  std::vector<double> frobenius;      // per init: ||K_r - mean||_F
  double mean_deviation = 0.0;        // mean over inits and entries of |K_r - mean|
};

/// Probe seeds base, base + 1, ..., base + R - 1.
inline std::vector<std::uint64_t> probe_seeds(std::uint64_t base, std::size_t count) {
  std::vector<std::uint64_t> s(count);
  for (std::size_t r = 0; r < count; ++r) s[r] = base + r;
  return s;
}

/// Empirical QNTK Gram of `contexts` for one theta0 per seed (init stream of
/// trial 0), compared against the across-initialization mean.
inline ConcentrationReport concentration_probe(const CircuitSpec& ansatz, std::span<const Vec> contexts,
                                               std::span<const std::uint64_t> seeds, std::size_t jobs = 1) {
  if (seeds.size() < 2) throw std::invalid_argument("concentration probe needs at least two initializations");
  if (contexts.empty()) throw std::invalid_argument("concentration probe needs at least one context");
  const std::size_t R = seeds.size();
  std::vector<Eigen::MatrixXd> grams(R);
  auto work = [&](std::size_t r) {
    RandomStream rng(seeds[r], 0, StreamRole::kInit);
    const QntkFeatureMap phi(std::make_shared<const QnnModel>(QnnModel::random_init(ansatz, rng)));
    grams[r] = gram(phi, contexts).entries;
  };
  jobs = std::clamp<std::size_t>(jobs, 1, R);
  if (jobs == 1) {
    for (std::size_t r = 0; r < R; ++r) work(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j)
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < R; r = next++) work(r);
      });
  }

  const auto n = static_cast<Eigen::Index>(contexts.size());
  ConcentrationReport rep;
  rep.initializations = R;
  rep.num_qubits = ansatz.num_qubits;
  rep.layers = ansatz.layers;
  rep.mean_kernel = Eigen::MatrixXd::Zero(n, n);
  for (const auto& g : grams) rep.mean_kernel += g;
  rep.mean_kernel /= static_cast<double>(R);
  double total = 0;
  for (const auto& g : grams) {
    const Eigen::MatrixXd dev = (g - rep.mean_kernel).cwiseAbs();
    rep.max_deviation.push_back(dev.maxCoeff());
    rep.frobenius.push_back(dev.norm());
    total += dev.sum();
  }
  rep.mean_deviation = total / (static_cast<double>(R) * static_cast<double>(n * n));
  return rep;
}

struct RealizabilityResult {
  double norm = 0.0;
  bool regularized = false;
};

/// sqrt(2 h^T K^{-1} h). A K with min eigenvalue <= 1e-10 is shifted by
/// 1e-8 I when `allow_regularization` is set and rejected otherwise.
inline RealizabilityResult realizability_norm(const Eigen::MatrixXd& k, const Eigen::VectorXd& h,
                                              bool allow_regularization = true) {
  if (k.rows() != k.cols() || k.rows() != h.size())
    throw std::invalid_argument("kernel matrix and reward vector sizes differ");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
  RealizabilityResult out;
  Eigen::MatrixXd kk = k;
  if (k.rows() > 0 && es.eigenvalues().minCoeff() <= 1e-10) {
    if (!allow_regularization) throw std::invalid_argument("kernel matrix is singular");
    kk += 1e-8 * Eigen::MatrixXd::Identity(k.rows(), k.cols());
    out.regularized = true;
  }
  out.norm = std::sqrt(std::max(2.0 * h.dot(kk.ldlt().solve(h)), 0.0));
  return out;
}

// Serialization.

inline nlohmann::json to_json(const SpectrumReport& r) {
  return {{"eigenvalues", std::vector<double>(r.eigenvalues.data(), r.eigenvalues.data() + r.eigenvalues.size())},
          {"logdet", r.logdet},
          {"effective_dimension", r.effective_dimension},
          {"min_eigenvalue", r.min_eigenvalue},
          {"contexts", r.contexts},
          {"lambda", r.lambda}};
}

inline nlohmann::json to_json(const ConcentrationReport& r) {
  std::vector<std::vector<double>> mean(static_cast<std::size_t>(r.mean_kernel.rows()));
  for (Eigen::Index i = 0; i < r.mean_kernel.rows(); ++i)
    for (Eigen::Index j = 0; j < r.mean_kernel.cols(); ++j) mean[static_cast<std::size_t>(i)].push_back(r.mean_kernel(i, j));
  return {{"initializations", r.initializations},
          {"m", r.num_qubits},
          {"L", r.layers},
          {"max_deviation", r.max_deviation},
          {"frobenius", r.frobenius},
          {"mean_deviation", r.mean_deviation},
          {"mean_kernel", mean}};
}

/// Columns: init,max_deviation,frobenius,m,L.
inline void write_concentration_csv(std::ostream& os, std::span<const ConcentrationReport> reports) {
  os << "init,max_deviation,frobenius,m,L\n";
  for (const auto& r : reports)
    for (std::size_t i = 0; i < r.initializations; ++i)
      os << i << ',' << format_number(r.max_deviation[i]) << ',' << format_number(r.frobenius[i]) << ','
         << r.num_qubits << ',' << r.layers << '\n';
}

/// Columns: index,eigenvalue.
inline void write_spectrum_csv(std::ostream& os, const SpectrumReport& r) {
  os << "index,eigenvalue\n";
  for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i) os << i << ',' << format_number(r.eigenvalues(i)) << '\n';
}

}  // namespace qntk
