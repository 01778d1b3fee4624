#pragma once

// Parameterized circuit families, the QNN reward model built on them, and
// the two-term parameter-shift gradient.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qntk/rng.hpp"
#include "qntk/statevector.hpp"

namespace qntk {

enum class GateKind { RX, RY, RZ, ROT, CNOT, H };

enum class Binding { kFixed, kTrainable, kData };

struct GateSpec {
  GateKind kind = GateKind::RY;
  std::vector<std::size_t> qubits;  // {target} or {control, target}
  Binding binding = Binding::kFixed;
  std::array<double, 3> angles{};  // used when binding == kFixed
  std::size_t slot = 0;            // first trainable slot, or data index
  double data_scale = std::numbers::pi;

  std::size_t num_angles() const {
    switch (kind) {
      case GateKind::ROT: return 3;
      case GateKind::RX:
      case GateKind::RY:
      case GateKind::RZ: return 1;
      default: return 0;
    }
  }
  bool trainable() const { return binding == Binding::kTrainable; }
};

struct CircuitSpec {
  std::size_t num_qubits = 0;
  std::size_t layers = 0;
  std::vector<GateSpec> gates;
  std::size_t num_trainable = 0;
  std::vector<std::size_t> layer_begin;  // gate index at which each layer starts

  /// Checks qubit ranges and that trainable slots cover 0..p-1 exactly once.
  void validate() const {
    std::vector<int> used(num_trainable, 0);
    for (const auto& g : gates) {
      for (auto q : g.qubits) {
        if (q >= num_qubits) throw std::out_of_range("gate qubit " + std::to_string(q) + " out of range");
      }
      if (g.kind == GateKind::CNOT && (g.qubits.size() != 2 || g.qubits[0] == g.qubits[1])) {
        throw std::invalid_argument("CNOT needs two distinct qubits");
      }
      if (!g.trainable()) continue;
      if (g.num_angles() == 0) throw std::invalid_argument("trainable gate must be a rotation");
      for (std::size_t k = 0; k < g.num_angles(); ++k) {
        if (g.slot + k >= num_trainable) throw std::out_of_range("trainable slot beyond num_trainable");
        ++used[g.slot + k];
      }
    }
    for (std::size_t j = 0; j < num_trainable; ++j) {
      if (used[j] != 1) throw std::invalid_argument("trainable slot " + std::to_string(j) + " not used exactly once");
    }
  }
};

namespace detail {

inline GateSpec trainable_rot(std::size_t q, std::size_t slot) {
  GateSpec g;
  g.kind = GateKind::ROT;
  g.qubits = {q};
  g.binding = Binding::kTrainable;
  g.slot = slot;
  return g;
}

inline GateSpec cnot(std::size_t control, std::size_t target) {
  GateSpec g;
  g.kind = GateKind::CNOT;
  g.qubits = {control, target};
  return g;
}

inline Mat2 rotation_matrix(GateKind kind, const double* a) {
  switch (kind) {
    case GateKind::RX: return gates::rx(a[0]);
    case GateKind::RY: return gates::ry(a[0]);
    case GateKind::RZ: return gates::rz(a[0]);
    case GateKind::ROT: return gates::rot(a[0], a[1], a[2]);
    case GateKind::H: return gates::hadamard();
    default: throw std::logic_error("not a single-qubit gate");
  }
}

inline void apply_gate(Statevector& psi, const GateSpec& g, std::span<const double> theta,
                       std::span<const double> x) {
  if (g.kind == GateKind::CNOT) {
    psi.apply_cnot_unchecked(g.qubits[0], g.qubits[1]);
    return;
  }
  std::array<double, 3> a = g.angles;
  if (g.binding == Binding::kTrainable) {
    for (std::size_t k = 0; k < g.num_angles(); ++k) a[k] = theta[g.slot + k];
  } else if (g.binding == Binding::kData) {
    a[0] = g.data_scale * x[g.slot];
  }
  if (g.kind == GateKind::RY) {
    psi.apply_ry(g.qubits[0], a[0]);
  } else {
    psi.apply_unchecked(g.qubits[0], rotation_matrix(g.kind, a.data()));
  }
}

}  // namespace detail

/// Runs gates in order on a copy of `init`.
inline Statevector simulate(std::span<const GateSpec> program, std::span<const double> theta,
                            Statevector init, std::span<const double> x = {}) {
  for (const auto& g : program) detail::apply_gate(init, g, theta, x);
  return init;
}

/// Gradient of cost(U(theta)|init>) with respect to every trainable slot.
/// Component j is [cost(theta + pi/2 e_j) - cost(theta - pi/2 e_j)] / 2, which
/// is exact for rotations generated by Paulis. Each shifted evaluation
/// resumes from the cached state just before the shifted gate.
template <class Cost>
std::vector<double> shift_gradient(std::span<const GateSpec> program, std::size_t num_trainable,
                                   std::span<const double> theta, const Statevector& init, Cost&& cost) {
  if (theta.size() != num_trainable) {
    throw std::invalid_argument("theta has " + std::to_string(theta.size()) + " entries, expected " +
                                std::to_string(num_trainable));
  }
  std::vector<double> grad(num_trainable, 0.0);
  std::vector<std::pair<std::size_t, Statevector>> checkpoints;
  Statevector psi = init;
  for (std::size_t i = 0; i < program.size(); ++i) {
    if (program[i].trainable()) checkpoints.emplace_back(i, psi);
    detail::apply_gate(psi, program[i], theta, {});
  }
  std::vector<double> shifted(theta.begin(), theta.end());
  constexpr double kShift = std::numbers::pi / 2;
  for (const auto& [gate_index, before] : checkpoints) {
    const GateSpec& g = program[gate_index];
    for (std::size_t k = 0; k < g.num_angles(); ++k) {
      const std::size_t j = g.slot + k;
      double value[2];
      for (int side = 0; side < 2; ++side) {
        shifted[j] = theta[j] + (side == 0 ? kShift : -kShift);
        Statevector s = before;
        for (std::size_t i = gate_index; i < program.size(); ++i) detail::apply_gate(s, program[i], shifted, {});
        value[side] = cost(s);
      }
      shifted[j] = theta[j];
      grad[j] = 0.5 * (value[0] - value[1]);
    }
  }
  return grad;
}

// ---------------------------------------------------------------------------
// Builders

inline std::size_t encoder_reps_for(std::size_t dim, std::size_t m) { return (dim + m - 1) / m; }

/// RY(pi * x[(r*m + q) mod d]) on qubit q for each repetition r, rep-major.
inline std::vector<GateSpec> build_encoder(std::span<const double> x, std::size_t m, std::size_t reps) {
  if (x.empty()) throw std::invalid_argument("encoder needs a non-empty context");
  if (m == 0) throw std::invalid_argument("encoder needs at least one qubit");
  std::vector<GateSpec> out;
  out.reserve(reps * m);
  for (std::size_t r = 0; r < reps; ++r) {
    for (std::size_t q = 0; q < m; ++q) {
      GateSpec g;
      g.kind = GateKind::RY;
      g.qubits = {q};
      g.angles[0] = std::numbers::pi * x[(r * m + q) % x.size()];
      out.push_back(std::move(g));
    }
  }
  return out;
}

/// Per layer: Rot on every qubit, then CNOT(q, (q + r_l) mod m), r_l = 1 + (l mod (m-1)).
inline CircuitSpec build_strongly_entangling(std::size_t m, std::size_t layers) {
  if (m < 2) throw std::invalid_argument("strongly entangling ansatz needs m >= 2");
  if (layers < 1) throw std::invalid_argument("strongly entangling ansatz needs at least one layer");
  CircuitSpec c;
  c.num_qubits = m;
  c.layers = layers;
  for (std::size_t l = 0; l < layers; ++l) {
    c.layer_begin.push_back(c.gates.size());
    for (std::size_t q = 0; q < m; ++q) c.gates.push_back(detail::trainable_rot(q, 3 * (l * m + q)));
    const std::size_t range = 1 + (l % (m - 1));
    for (std::size_t q = 0; q < m; ++q) c.gates.push_back(detail::cnot(q, (q + range) % m));
  }
  c.num_trainable = 3 * m * layers;
  return c;
}

/// Hardware-efficient ansatz: per layer Rot on every qubit, then a linear CNOT chain.
inline CircuitSpec build_hea(std::size_t m, std::size_t layers = 2) {
  if (m < 2) throw std::invalid_argument("hardware-efficient ansatz needs m >= 2");
  CircuitSpec c;
  c.num_qubits = m;
  c.layers = layers;
  for (std::size_t l = 0; l < layers; ++l) {
    c.layer_begin.push_back(c.gates.size());
    for (std::size_t q = 0; q < m; ++q) c.gates.push_back(detail::trainable_rot(q, 3 * (l * m + q)));
    for (std::size_t q = 0; q + 1 < m; ++q) c.gates.push_back(detail::cnot(q, q + 1));
  }
  c.num_trainable = 3 * m * layers;
  return c;
}

inline CircuitSpec build_circuit(std::string_view family, std::size_t m, std::size_t layers) {
  if (family == "strongly_entangling") return build_strongly_entangling(m, layers);
  if (family == "hea") return build_hea(m, layers);
  throw std::invalid_argument("unknown circuit family '" + std::string(family) + "'");
}

// ---------------------------------------------------------------------------
// Ising Hamiltonian

struct IsingHamiltonian {
  double field_strength = 0;
  std::size_t num_qubits = 0;
  Observable terms;
};

/// H(c) = -sum_i Z_i Z_{i+1} - c sum_i X_i (open chain).
inline IsingHamiltonian ising(double c, std::size_t m) {
  if (m < 2) throw std::invalid_argument("Ising chain needs m >= 2");
  IsingHamiltonian h{c, m, {}};
  for (std::size_t i = 0; i + 1 < m; ++i) {
    h.terms.terms.push_back({-1.0, {{i, PauliAxis::Z}, {i + 1, PauliAxis::Z}}});
  }
  for (std::size_t i = 0; i < m; ++i) h.terms.terms.push_back({-c, {{i, PauliAxis::X}}});
  return h;
}

inline double energy(const Statevector& initial, const IsingHamiltonian& h, const CircuitSpec& ansatz,
                     std::span<const double> theta) {
  return expectation(simulate(ansatz.gates, theta, initial), h.terms);
}

/// Plain gradient descent on E(theta) = <init| U(theta)^dag H U(theta) |init>
/// from theta = 0; returns E(theta_steps).
inline double vqe_optimize(const Statevector& initial, const IsingHamiltonian& h, const CircuitSpec& ansatz,
                           std::size_t steps, double lr) {
  if (initial.num_qubits() != h.num_qubits || ansatz.num_qubits != h.num_qubits) {
    throw std::invalid_argument("VQE state, Hamiltonian and ansatz must act on the same qubit count");
  }
  std::vector<double> theta(ansatz.num_trainable, 0.0);
  auto cost = [&](const Statevector& s) { return expectation(s, h.terms); };
  for (std::size_t s = 0; s < steps; ++s) {
    const auto grad = shift_gradient(ansatz.gates, ansatz.num_trainable, theta, initial, cost);
    for (std::size_t j = 0; j < theta.size(); ++j) theta[j] -= lr * grad[j];
  }
  return energy(initial, h, ansatz, theta);
}

// ---------------------------------------------------------------------------
// QNN reward model

/// f(x; theta) = (1/sqrt(m)) sum_k <Z_k>, on the state produced by the
/// data encoder interleaved with the ansatz and applied to |0...0>.
/// Encoder repetition r is placed in front of ansatz layer (r mod L).
class QnnModel {
 public:
  /// encoder_reps: nullopt picks ceil(d/m) per context; 0 disables encoding.
  QnnModel(CircuitSpec ansatz, std::vector<double> theta0, std::optional<std::size_t> encoder_reps = std::nullopt)
      : ansatz_(std::move(ansatz)),
        observable_(sum_z(ansatz_.num_qubits)),
        output_norm_(std::sqrt(static_cast<double>(ansatz_.num_qubits))),
        theta0_(std::move(theta0)),
        encoder_reps_(encoder_reps),
        centering_(std::make_shared<CenterCache>()) {
    ansatz_.validate();
    if (theta0_.size() != ansatz_.num_trainable) throw std::invalid_argument("theta0 length must equal p");
  }

  /// theta0 entries drawn i.i.d. uniform on [0, pi].
  static QnnModel random_init(CircuitSpec ansatz, RandomStream& rng,
                              std::optional<std::size_t> encoder_reps = std::nullopt) {
    std::vector<double> theta0(ansatz.num_trainable);
    for (auto& t : theta0) t = rng.uniform(0.0, std::numbers::pi);
    return QnnModel(std::move(ansatz), std::move(theta0), encoder_reps);
  }

  const CircuitSpec& circuit() const { return ansatz_; }
  const std::vector<double>& theta0() const { return theta0_; }
  std::size_t num_qubits() const { return ansatz_.num_qubits; }
  std::size_t num_trainable() const { return ansatz_.num_trainable; }
  double output_norm() const { return output_norm_; }
  const Observable& observable() const { return observable_; }

  /// Ansatz gates with the context encoder spliced in.
  std::vector<GateSpec> program(std::span<const double> x) const {
    const std::size_t m = num_qubits();
    const std::size_t reps = encoder_reps_.has_value() ? *encoder_reps_ : encoder_reps_for(x.size(), m);
    if (reps == 0) return ansatz_.gates;
    if (std::abs(norm2(x) - 1.0) > 1e-8) throw std::invalid_argument("context must have unit 2-norm");
    const auto enc = build_encoder(x, m, reps);
    const std::size_t layers = std::max<std::size_t>(ansatz_.layer_begin.size(), 1);
    std::vector<GateSpec> out;
    out.reserve(ansatz_.gates.size() + enc.size());
    auto emit_encoders_for = [&](std::size_t layer) {
      for (std::size_t r = layer; r < reps; r += layers) {
        out.insert(out.end(), enc.begin() + static_cast<std::ptrdiff_t>(r * m),
                   enc.begin() + static_cast<std::ptrdiff_t>((r + 1) * m));
      }
    };
    std::vector<std::size_t> bounds = ansatz_.layer_begin;
    if (bounds.empty()) bounds.push_back(0);
    bounds.push_back(ansatz_.gates.size());
    for (std::size_t l = 0; l + 1 < bounds.size(); ++l) {
      emit_encoders_for(l);
      out.insert(out.end(), ansatz_.gates.begin() + static_cast<std::ptrdiff_t>(bounds[l]),
                 ansatz_.gates.begin() + static_cast<std::ptrdiff_t>(bounds[l + 1]));
    }
    return out;
  }

  /// Uncentered output.
  double raw_output(std::span<const double> x, std::span<const double> theta) const {
    check_theta(theta);
    const auto prog = program(x);
    return evaluate(simulate(prog, theta, zero_state(num_qubits())));
  }

  /// Centered output f(x; theta) - f(x; theta0), zero at theta0.
  double output(std::span<const double> x, std::span<const double> theta) const {
    return raw_output(x, theta) - center_offset(x);
  }

  double center_offset(std::span<const double> x) const {
    std::vector<double> key(x.begin(), x.end());
    {
      std::lock_guard lock(centering_->mutex);
      if (auto it = centering_->values.find(key); it != centering_->values.end()) return it->second;
    }
    const double v = raw_output(x, theta0_);
    std::lock_guard lock(centering_->mutex);
    centering_->values.emplace(std::move(key), v);
    return v;
  }

  std::vector<double> gradient(std::span<const double> x, std::span<const double> theta) const {
    check_theta(theta);
    const auto prog = program(x);
    return shift_gradient(prog, num_trainable(), theta, zero_state(num_qubits()),
                          [this](const Statevector& s) { return evaluate(s); });
  }

 private:
  struct CenterCache {
    std::mutex mutex;
    std::map<std::vector<double>, double> values;
  };

  static double norm2(std::span<const double> x) {
    double acc = 0;
    for (double v : x) acc += v * v;
    return std::sqrt(acc);
  }

  void check_theta(std::span<const double> theta) const {
    if (theta.size() != num_trainable()) {
      throw std::invalid_argument("theta has " + std::to_string(theta.size()) + " entries, expected " +
                                  std::to_string(num_trainable()));
    }
  }

  double evaluate(const Statevector& s) const {
    // sum_k <Z_k> directly from probabilities.
    const std::size_t m = s.num_qubits();
    const auto amps = s.amplitudes();
    double acc = 0;
    for (std::size_t i = 0; i < amps.size(); ++i) {
      const double p = std::norm(amps[i]);
      acc += p * (static_cast<double>(m) - 2.0 * std::popcount(i));
    }
    return acc / output_norm_;
  }

  CircuitSpec ansatz_;
  Observable observable_;
  double output_norm_;
  std::vector<double> theta0_;
  std::optional<std::size_t> encoder_reps_;
  std::shared_ptr<CenterCache> centering_;
};

inline double qnn_output(const QnnModel& model, std::span<const double> x, std::span<const double> theta) {
  return model.output(x, theta);
}

inline std::vector<double> parameter_shift_gradient(const QnnModel& model, std::span<const double> x,
                                                    std::span<const double> theta) {
  return model.gradient(x, theta);
}

}  // namespace qntk
