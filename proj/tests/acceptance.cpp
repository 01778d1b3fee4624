// Acceptance report: one PASS/FAIL line per criterion, INFO lines for
// supporting measurements.
//
// Exit status: nonzero when a correctness criterion fails. The benchmark
// trend criteria (regret orderings, effective-dimension and concentration
// trends) are printed with their measured values but only affect the exit
// status under --strict.

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dense_oracle.hpp"
#include "qntk/analysis.hpp"
#include "qntk/bandit.hpp"
#include "qntk/circuits.hpp"
#include "qntk/csv.hpp"
#include "qntk/harness.hpp"
#include "qntk/statevector.hpp"
#include "qntk/studies.hpp"

namespace {

using namespace qntk;
using Clock = std::chrono::steady_clock;

// Pinned tolerances and budgets.
constexpr double kGradientTol = 1e-6;
constexpr double kFiniteDifferenceStep = 1e-4;
constexpr int kGradientDraws = 20;
constexpr double kGradientBudgetSeconds = 60;
constexpr double kSimulatorTol = 1e-10;
constexpr double kGroundEnergyTol = 1e-9;
constexpr int kDesignUpdates = 500;
constexpr Eigen::Index kDesignDim = 60;
constexpr double kInverseFrobeniusTol = 1e-8;
constexpr double kLogdetTol = 1e-6;
constexpr int kDualHistories = 20;
constexpr double kDualTol = 1e-6;
constexpr double kClosedFormTol = 1e-9;
constexpr double kScaleTol = 1e-9;
constexpr std::size_t kSpectrumContexts = 400;
constexpr double kQntkGrowthAllowance = 1.10;
constexpr double kStudyBudgetSeconds = 600;
constexpr std::size_t kConcentrationInits = 20;
constexpr std::size_t kConcentrationContexts = 10;
constexpr double kRegretFractionBound = 0.45;
constexpr double kBenchmarkBudgetSeconds = 1800;

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Report {
  int gating_failures = 0;
  int benchmark_failures = 0;

  void criterion(const std::string& name, bool pass, const std::string& detail, bool benchmark) {
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << name << ": " << detail << std::endl;
    if (!pass) ++(benchmark ? benchmark_failures : gating_failures);
  }
  void info(const std::string& name, const std::string& detail) {
    std::cout << "[INFO] " << name << ": " << detail << std::endl;
  }
};

std::vector<double> unit_context(std::size_t d, RandomStream& rng) {
  std::vector<double> x(d);
  double n = 0;
  for (auto& v : x) {
    v = rng.normal();
    n += v * v;
  }
  for (auto& v : x) v /= std::sqrt(n);
  return x;
}

// ---------------------------------------------------------------------------

void gradient_oracle(Report& rep) {
  const auto t0 = Clock::now();
  RandomStream rng(2024, 0, StreamRole::kProbe);
  double worst = 0;
  std::string per_family;
  const std::vector<std::pair<std::string, CircuitSpec>> families{
      {"SE m=3 L=4", build_strongly_entangling(3, 4)},
      {"SE m=5 L=4", build_strongly_entangling(5, 4)},
      {"SE m=10 L=4", build_strongly_entangling(10, 4)},
      {"HEA m=4", build_hea(4, 2)},
  };
  for (const auto& [name, circuit] : families) {
    const auto model = QnnModel::random_init(circuit, rng);
    double family_worst = 0;
    for (int draw = 0; draw < kGradientDraws; ++draw) {
      const auto x = unit_context(2 * circuit.num_qubits, rng);
      std::vector<double> theta(model.num_trainable());
      for (auto& t : theta) t = rng.uniform(0, 2 * std::numbers::pi);
      const auto g = parameter_shift_gradient(model, x, theta);
      for (std::size_t j = 0; j < theta.size(); ++j) {
        auto up = theta, down = theta;
        up[j] += kFiniteDifferenceStep;
        down[j] -= kFiniteDifferenceStep;
        const double fd = (model.raw_output(x, up) - model.raw_output(x, down)) / (2 * kFiniteDifferenceStep);
        family_worst = std::max(family_worst, std::abs(g[j] - fd));
      }
    }
    worst = std::max(worst, family_worst);
    per_family += (per_family.empty() ? "" : ", ") + name + " " + fmt(family_worst, 2);
  }
  const double secs = seconds_since(t0);
  rep.criterion("gradient oracle", worst <= kGradientTol && secs < kGradientBudgetSeconds,
                "max |shift - central FD| = " + fmt(worst, 3) + " (tol " + fmt(kGradientTol) + "; " + per_family +
                    "), " + fmt(secs, 3) + " s",
                false);
}

// Closed-form single-qubit matrices, written out independently of the library.
oracle::CMat closed_form(GateKind kind, const std::array<double, 3>& a) {
  using C = std::complex<double>;
  const C i(0, 1);
  auto rz = [&](double t) {
    oracle::CMat m = oracle::CMat::Zero(2, 2);
    m(0, 0) = std::exp(-i * (t / 2));
    m(1, 1) = std::exp(i * (t / 2));
    return m;
  };
  auto ry = [&](double t) {
    oracle::CMat m(2, 2);
    m << std::cos(t / 2), -std::sin(t / 2), std::sin(t / 2), std::cos(t / 2);
    return m;
  };
  oracle::CMat m(2, 2);
  switch (kind) {
    case GateKind::RX:
      m << std::cos(a[0] / 2), -i * std::sin(a[0] / 2), -i * std::sin(a[0] / 2), std::cos(a[0] / 2);
      return m;
    case GateKind::RY: return ry(a[0]);
    case GateKind::RZ: return rz(a[0]);
    case GateKind::ROT: return rz(a[2]) * ry(a[1]) * rz(a[0]);
    default:
      m << 1, 1, 1, -1;
      return m / std::sqrt(2.0);
  }
}

oracle::CMat dense_program(const std::vector<GateSpec>& program, const std::vector<double>& theta, std::size_t m) {
  const Eigen::Index dim = Eigen::Index{1} << m;
  oracle::CMat u = oracle::CMat::Identity(dim, dim);
  for (const auto& g : program) {
    if (g.kind == GateKind::CNOT) {
      u = oracle::cnot(g.qubits[0], g.qubits[1], m) * u;
      continue;
    }
    std::array<double, 3> a = g.angles;
    if (g.trainable())
      for (std::size_t k = 0; k < g.num_angles(); ++k) a[k] = theta[g.slot + k];
    u = oracle::embed(closed_form(g.kind, a), g.qubits[0], m) * u;
  }
  return u;
}

void simulator_oracle(Report& rep) {
  RandomStream rng(7, 0, StreamRole::kProbe);
  double worst = 0;
  auto random_state = [&](std::size_t m) {
    std::vector<cplx> amps(std::size_t{1} << m);
    double n = 0;
    for (auto& a : amps) {
      a = {rng.normal(), rng.normal()};
      n += std::norm(a);
    }
    for (auto& a : amps) a /= std::sqrt(n);
    return Statevector(m, std::move(amps));
  };
  auto compare = [&](const Statevector& got, const oracle::CVec& want) {
    for (std::size_t i = 0; i < got.dim(); ++i) worst = std::max(worst, std::abs(got[i] - want(static_cast<Eigen::Index>(i))));
  };
  std::size_t checked = 0;
  for (std::size_t m = 1; m <= 3; ++m) {
    for (int rep_i = 0; rep_i < 20; ++rep_i) {
      for (GateKind kind : {GateKind::RX, GateKind::RY, GateKind::RZ, GateKind::ROT, GateKind::H}) {
        GateSpec g;
        g.kind = kind;
        g.qubits = {static_cast<std::size_t>(rng.below(static_cast<std::uint32_t>(m)))};
        g.angles = {rng.uniform(0, 2 * std::numbers::pi), rng.uniform(0, 2 * std::numbers::pi),
                    rng.uniform(0, 2 * std::numbers::pi)};
        const auto psi = random_state(m);
        const std::vector<GateSpec> program{g};
        compare(simulate(program, {}, psi), dense_program(program, {}, m) * oracle::to_vec(psi));
        ++checked;
      }
      if (m >= 2) {
        GateSpec g;
        g.kind = GateKind::CNOT;
        const auto c = static_cast<std::size_t>(rng.below(static_cast<std::uint32_t>(m)));
        auto t = static_cast<std::size_t>(rng.below(static_cast<std::uint32_t>(m - 1)));
        if (t >= c) ++t;
        g.qubits = {c, t};
        const auto psi = random_state(m);
        const std::vector<GateSpec> program{g};
        compare(simulate(program, {}, psi), dense_program(program, {}, m) * oracle::to_vec(psi));
        ++checked;
      }
    }
  }
  for (const auto& circuit : {build_strongly_entangling(2, 2), build_strongly_entangling(3, 2), build_hea(3, 2)}) {
    std::vector<double> theta(circuit.num_trainable);
    for (auto& t : theta) t = rng.uniform(0, 2 * std::numbers::pi);
    const auto psi = random_state(circuit.num_qubits);
    compare(simulate(circuit.gates, theta, psi), dense_program(circuit.gates, theta, circuit.num_qubits) * oracle::to_vec(psi));
    ++checked;
  }
  const double e0 = oracle::ground_energy(ising(0.0, 4).terms, 4);
  rep.criterion("simulator oracle", worst <= kSimulatorTol && std::abs(e0 + 3.0) <= kGroundEnergyTol,
                std::to_string(checked) + " gate/circuit applications, max amplitude error " + fmt(worst, 3) +
                    " (tol " + fmt(kSimulatorTol) + "); Ising(c=0, m=4) dense ground energy " + fmt(e0, 12),
                false);
}

void design_algebra(Report& rep) {
  RandomStream rng(31, 0, StreamRole::kProbe);
  const double lambda = 1.0;
  DesignState s(static_cast<std::size_t>(kDesignDim), lambda, 0);  // pure Sherman-Morrison, no refresh
  Eigen::MatrixXd z = lambda * Eigen::MatrixXd::Identity(kDesignDim, kDesignDim);
  double worst_inv = 0, worst_logdet = 0;
  for (int t = 0; t < kDesignUpdates; ++t) {
    Vec phi(kDesignDim);
    for (auto& v : phi) v = rng.normal() / std::sqrt(static_cast<double>(kDesignDim));
    s.update(phi, rng.normal());
    z += phi * phi.transpose();
    if ((t + 1) % 50 == 0) {
      worst_inv = std::max(worst_inv, (s.z_inv() - z.inverse()).norm());
      const double dense = std::log(z.fullPivLu().determinant()) - kDesignDim * std::log(lambda);
      worst_logdet = std::max(worst_logdet, std::abs(s.logdet_ratio() - dense));
    }
  }
  const PolicyConfig th{0.7, TheoreticalExploration{0.5, 0.05, 2.0}};
  const DesignState fresh(4, 0.7);
  const double beta0 = exploration_radius(fresh, th);
  const double anchor = 0.5 * std::sqrt(2.0 * std::log(1.0 / 0.05)) + std::sqrt(0.7) * 2.0;
  rep.criterion("design-matrix algebra",
                worst_inv <= kInverseFrobeniusTol && worst_logdet <= kLogdetTol && beta0 == anchor,
                "after " + std::to_string(kDesignUpdates) + " rank-1 updates at p=" + std::to_string(kDesignDim) +
                    ": max ||Zinv - inv(Z)||_F " + fmt(worst_inv, 3) + " (tol " + fmt(kInverseFrobeniusTol) +
                    "), max logdet error " + fmt(worst_logdet, 3) + " (tol " + fmt(kLogdetTol) + "); beta_0 " +
                    fmt(beta0, 17) + (beta0 == anchor ? " == " : " != ") + "nu sqrt(2 log(1/delta)) + sqrt(lambda) S",
                false);
}

void primal_dual(Report& rep) {
  RandomStream rng(41, 0, StreamRole::kProbe);
  struct Linear final : FeatureMap {
    Eigen::MatrixXd w;
    std::size_t dim() const override { return static_cast<std::size_t>(w.rows()); }
    Vec operator()(const Vec& x) const override { return w * x; }
  };
  double worst_mean = 0, worst_width = 0;
  for (int h = 0; h < kDualHistories; ++h) {
    const auto p = static_cast<Eigen::Index>(1 + rng.below(12));
    const auto n = 1 + rng.below(10);
    const double lambda = 0.05 + 2 * rng.uniform();
    auto map = std::make_shared<Linear>();
    map->w = Eigen::MatrixXd::NullaryExpr(p, 4, [&] { return rng.normal(); });
    DesignState primal(static_cast<std::size_t>(p), lambda);
    DualState dual(make_explicit_kernel(map), lambda);
    for (std::uint32_t t = 0; t < n; ++t) {
      Vec x(4);
      for (auto& v : x) v = rng.normal();
      const double r = rng.normal();
      primal.update((*map)(x), r);
      dual.update(x, r);
    }
    for (int q = 0; q < 5; ++q) {
      Vec x(4);
      for (auto& v : x) v = rng.normal();
      const auto a = primal.predict((*map)(x)), b = dual.predict(x);
      worst_mean = std::max(worst_mean, std::abs(a.mean - b.mean));
      worst_width = std::max(worst_width, std::abs(a.width_sq - b.width_sq) / std::max(1.0, a.width_sq));
    }
  }
  rep.criterion("primal/dual equivalence", worst_mean <= kDualTol && worst_width <= kDualTol,
                std::to_string(kDualHistories) + " histories (n<=10, p<=12): max mean gap " + fmt(worst_mean, 3) +
                    ", max relative width gap " + fmt(worst_width, 3) + " (tol " + fmt(kDualTol) + ")",
                false);
}

void effective_dimension_checks(Report& rep) {
  const double closed = effective_dimension(Eigen::MatrixXd::Identity(4, 4), 1.0);
  const double closed_err = std::abs(closed - 4 * std::log(2.0) / std::log(5.0));
  RandomStream rng(51, 0, StreamRole::kProbe);
  const Eigen::Index n = 12;
  const Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(n, 7, [&] { return rng.normal(); });
  const Eigen::MatrixXd k = a * a.transpose();
  const double lambda = 0.8;
  double numerator_err = 0, corrected_err = 0, literal_gap = 0;
  for (double c : {0.1, 10.0}) {
    numerator_err = std::max(numerator_err, std::abs(information_gain(c * k, lambda) - information_gain(k, lambda / c)));
    const double lhs = effective_dimension(c * k, lambda) * std::log1p(n / lambda);
    const double rhs = effective_dimension(k, lambda / c) * std::log1p(n / (lambda / c));
    corrected_err = std::max(corrected_err, std::abs(lhs - rhs));
    literal_gap = std::max(literal_gap, std::abs(effective_dimension(c * k, lambda) - effective_dimension(k, lambda / c)));
  }
  rep.criterion("effective dimension",
                closed_err <= kClosedFormTol && numerator_err <= kScaleTol && corrected_err <= kScaleTol,
                "d(I4, 1) = " + fmt(closed, 12) + " (err " + fmt(closed_err, 2) +
                    " vs 4 ln2/ln5); scale relation c in {0.1, 10}: log det numerator err " + fmt(numerator_err, 2) +
                    ", normalizer-corrected err " + fmt(corrected_err, 2) + " (tol " + fmt(kScaleTol) + ")",
                false);
  rep.info("effective dimension",
           "the normalized ratio itself is not scale invariant because its normalizer log(1 + n/lambda) moves with "
           "lambda; uncorrected gap " + fmt(literal_gap, 4));
}

// ---------------------------------------------------------------------------

ExperimentConfig benchmark_config(std::size_t jobs) {
  ExperimentConfig c;
  c.quantum.num_qubits = 5;
  c.quantum.layers = 4;
  c.trials = 10;
  c.grid.trials = 10;
  c.base_seed = 0;
  c.jobs = jobs;
  return c;
}

void spectrum_trend(Report& rep, std::size_t jobs) {
  const auto t0 = Clock::now();
  AnalysisConfig an;
  an.qubits = {3, 5, 10};
  an.layers = 4;
  an.kernels = {"qntk", "cntk"};
  an.lambda = 1.0;
  an.contexts = kSpectrumContexts;
  const auto rows = kernel_spectrum(benchmark_config(jobs), an);
  std::map<std::string, std::vector<double>> d;
  std::string detail;
  for (const auto& r : rows) {
    d[r.kernel].push_back(r.effective_dimension);
    detail += r.kernel + "(m=" + std::to_string(r.num_qubits) + ",p=" + std::to_string(r.params) +
              ")=" + fmt(r.effective_dimension) + " ";
  }
  const auto& c = d["cntk"];
  const auto& q = d["qntk"];
  const bool cntk_up = c[0] < c[1] && c[1] < c[2];
  const bool qntk_flat = q[2] <= kQntkGrowthAllowance * q[1];
  const double secs = seconds_since(t0);
  rep.criterion("effective-dimension trend", cntk_up && qntk_flat && secs < kStudyBudgetSeconds,
                detail + "| CNTK strictly increasing: " + (cntk_up ? "yes" : "no") + ", QNTK m=10 <= 1.1 x m=5: " +
                    (qntk_flat ? "yes" : "no") + ", " + fmt(secs, 3) + " s",
                true);

  // The CNTK features above carry the 1/sqrt(p_c) scale. Two other common
  // scalings of the same frozen gradients, for comparison.
  std::string alt;
  for (auto m : an.qubits) {
    const auto cfg = at_qubits(benchmark_config(jobs), m, an.layers);
    TrialResources res(cfg);
    const auto xs = probe_contexts(res, cfg.base_seed, an.contexts);
    const auto mlp = res.initial_mlp(0);
    Eigen::MatrixXd f(static_cast<Eigen::Index>(mlp.param_count()), static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) f.col(static_cast<Eigen::Index>(i)) = grad_params(mlp, xs[i]);
    const Eigen::MatrixXd raw = f.transpose() * f;
    alt += "m=" + std::to_string(m) + " unscaled " + fmt(effective_dimension(raw, an.lambda)) + " / width-scaled " +
           fmt(effective_dimension(raw / static_cast<double>(mlp.width()), an.lambda)) + "; ";
  }
  rep.info("effective-dimension trend", "CNTK with other gradient scalings: " + alt);
}

void concentration_trend(Report& rep, std::size_t jobs) {
  const auto t0 = Clock::now();
  AnalysisConfig an;
  an.qubits = {3, 5, 10};
  an.layers = 4;
  an.initializations = kConcentrationInits;
  an.probe_contexts = kConcentrationContexts;
  const auto reports = concentration_study(benchmark_config(jobs), an, jobs);
  std::string detail;
  for (const auto& r : reports) detail += "m=" + std::to_string(r.num_qubits) + " " + fmt(r.mean_deviation) + ", ";
  const double secs = seconds_since(t0);
  rep.criterion("concentration trend",
                reports[2].mean_deviation < reports[0].mean_deviation && secs < kStudyBudgetSeconds,
                "mean entrywise deviation over " + std::to_string(kConcentrationInits) + " initializations: " + detail +
                    "m=10 < m=3: " + (reports[2].mean_deviation < reports[0].mean_deviation ? "yes" : "no") + ", " +
                    fmt(secs, 3) + " s",
                true);
}

struct BenchmarkOutcome {
  std::map<Algorithm, double> mean, stderr_;
  std::map<Algorithm, AlgorithmSettings> chosen;
  bool monotone = true;
  bool below_horizon = true;
  double seconds = 0;
};

BenchmarkOutcome grid_then_final(ExperimentConfig cfg) {
  const auto t0 = Clock::now();
  TrialResources res(cfg);
  const auto g = grid_search(cfg, res);
  for (const auto& [a, s] : g.best) cfg.settings[a] = s;
  const auto r = run_experiment(cfg, res);
  BenchmarkOutcome out;
  out.chosen = g.best;
  for (const auto& s : r.summaries) {
    out.mean[s.algorithm] = s.mean.back();
    out.stderr_[s.algorithm] = s.stderr_.back();
  }
  for (const auto& tr : r.traces) {
    for (std::size_t t = 1; t < tr.cumulative.size(); ++t) out.monotone &= tr.cumulative[t] >= tr.cumulative[t - 1];
    out.below_horizon &= tr.final_regret() < static_cast<double>(cfg.rounds);
  }
  out.seconds = seconds_since(t0);
  return out;
}

std::string describe(const BenchmarkOutcome& o) {
  std::string s;
  for (auto a : kAllAlgorithms) {
    const auto& c = o.chosen.at(a);
    s += std::string(algorithm_name(a)) + " " + fmt(o.mean.at(a)) + " +- " + fmt(o.stderr_.at(a), 3) + " (lambda " +
         fmt(c.lambda) + ", beta " + fmt(c.beta) + "); ";
  }
  return s;
}

void gaussian_quantiles_benchmark(Report& rep, std::size_t jobs) {
  auto cfg = benchmark_config(jobs);
  cfg.rounds = 500;
  const auto o = grid_then_final(cfg);
  const double q = o.mean.at(Algorithm::kQntkUcb), rbf = o.mean.at(Algorithm::kRbfUcb);
  const bool learns = q <= kRegretFractionBound * static_cast<double>(cfg.rounds);
  rep.criterion("Gaussian-quantiles regret (m=5, T=500)",
                q < rbf && learns && o.monotone && o.below_horizon && o.seconds < kBenchmarkBudgetSeconds,
                "mean R_T: " + describe(o) + "| QNTK < RBF: " + (q < rbf ? "yes" : "no") + ", QNTK <= 0.45 T: " +
                    (learns ? "yes" : "no") + ", all traces nondecreasing with R_T < T: " +
                    (o.monotone && o.below_horizon ? "yes" : "no") + ", " + fmt(o.seconds, 3) + " s",
                true);
  cfg.quantum.unit_diagonal = true;
  const auto u = grid_then_final(cfg);
  rep.info("Gaussian-quantiles regret (m=5, T=500)",
           "QNTK with unit-diagonal normalization: " + fmt(u.mean.at(Algorithm::kQntkUcb)) + " +- " +
               fmt(u.stderr_.at(Algorithm::kQntkUcb), 3));
}

void vqe_benchmark(Report& rep, std::size_t jobs) {
  auto cfg = benchmark_config(jobs);
  cfg.environment = "vqe";
  cfg.rounds = 300;
  const auto o = grid_then_final(cfg);
  const double q = o.mean.at(Algorithm::kQntkUcb);
  bool below_all = true;
  for (auto a : {Algorithm::kNeuralUcb, Algorithm::kCntkUcb, Algorithm::kRbfUcb}) below_all &= q < o.mean.at(a);
  rep.criterion("VQE regret (T=300)", below_all && o.monotone && o.seconds < kBenchmarkBudgetSeconds,
                "mean R_T: " + describe(o) + "| QNTK below every classical baseline: " + (below_all ? "yes" : "no") +
                    ", " + fmt(o.seconds, 3) + " s",
                true);
  cfg.quantum.unit_diagonal = true;
  const auto u = grid_then_final(cfg);
  rep.info("VQE regret (T=300)", "QNTK with unit-diagonal normalization: " + fmt(u.mean.at(Algorithm::kQntkUcb)) +
                                     " +- " + fmt(u.stderr_.at(Algorithm::kQntkUcb), 3));
}

// ---------------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void harness_determinism(Report& rep, std::size_t jobs) {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "qntk_acceptance_determinism";
  fs::remove_all(root);
  std::vector<std::string> traces;
  bool ok = true;
  for (int run = 0; run < 2; ++run) {
    const auto dir = root / std::to_string(run);
    const std::string cmd = std::string("\"") + QNTK_CLI_PATH +
                            "\" run -s quantum.num_qubits=3 -s quantum.layers=2 -s experiment.T=200 "
                            "-s experiment.trials=4 -s experiment.base_seed=5 -j " +
                            std::to_string(jobs) + " -o \"" + dir.string() + "\" > /dev/null";
    ok &= std::system(cmd.c_str()) == 0;
    traces.push_back(slurp(dir / "run_trace.csv"));
  }
  fs::remove_all(root);
  const bool same = ok && !traces[0].empty() && traces[0] == traces[1];
  rep.criterion("harness determinism", same,
                "two CLI invocations, 4 algorithms x 4 trials x 200 rounds: trace CSVs " +
                    std::string(same ? "byte-identical" : "differ or missing") + " (" +
                    std::to_string(traces[0].size()) + " bytes, FNV-1a " + hex64(fnv1a64(traces[0])) + ")",
                false);
}

}  // namespace

int main(int argc, char** argv) {
  bool strict = false;
  for (int i = 1; i < argc; ++i) strict |= std::string(argv[i]) == "--strict";
  const std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());

  Report rep;
  gradient_oracle(rep);
  simulator_oracle(rep);
  design_algebra(rep);
  primal_dual(rep);
  effective_dimension_checks(rep);
  spectrum_trend(rep, jobs);
  concentration_trend(rep, jobs);
  gaussian_quantiles_benchmark(rep, jobs);
  vqe_benchmark(rep, jobs);
  harness_determinism(rep, jobs);

  std::cout << "summary: " << rep.gating_failures << " correctness failure(s), " << rep.benchmark_failures
            << " benchmark failure(s)" << (strict ? " [strict]" : "") << std::endl;
  return rep.gating_failures > 0 || (strict && rep.benchmark_failures > 0) ? 1 : 0;
}
