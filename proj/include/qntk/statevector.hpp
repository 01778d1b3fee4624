#pragma once

// Dense pure-state simulation of m qubits.
//
// Bit convention: qubit 0 is the most significant bit of the amplitude
// index, so for m = 2 the basis order is |q0 q1> = 00, 01, 10, 11.

#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qntk {

using cplx = std::complex<double>;

/// Row-major 2x2 complex matrix {u00, u01, u10, u11}.
using Mat2 = std::array<cplx, 4>;

inline std::size_t& max_qubits() {
  static std::size_t limit = 16;
  return limit;
}

namespace gates {

inline Mat2 identity() { return {cplx{1}, cplx{0}, cplx{0}, cplx{1}}; }

inline Mat2 hadamard() {
  const double s = 1.0 / std::numbers::sqrt2;
  return {cplx{s}, cplx{s}, cplx{s}, cplx{-s}};
}

inline Mat2 pauli_x() { return {cplx{0}, cplx{1}, cplx{1}, cplx{0}}; }

inline Mat2 rx(double angle) {
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  return {cplx{c}, cplx{0, -s}, cplx{0, -s}, cplx{c}};
}

inline Mat2 ry(double angle) {
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  return {cplx{c}, cplx{-s}, cplx{s}, cplx{c}};
}

inline Mat2 rz(double angle) {
  return {std::polar(1.0, -angle / 2), cplx{0}, cplx{0}, std::polar(1.0, angle / 2)};
}

inline Mat2 multiply(const Mat2& a, const Mat2& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
          a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

/// Rot(phi, theta, omega) = RZ(omega) RY(theta) RZ(phi).
inline Mat2 rot(double phi, double theta, double omega) {
  return multiply(rz(omega), multiply(ry(theta), rz(phi)));
}

inline Mat2 adjoint(const Mat2& u) {
  return {std::conj(u[0]), std::conj(u[2]), std::conj(u[1]), std::conj(u[3])};
}

inline bool is_unitary(const Mat2& u, double tol = 1e-10) {
  const Mat2 p = multiply(adjoint(u), u);
  return std::abs(p[0] - 1.0) <= tol && std::abs(p[1]) <= tol && std::abs(p[2]) <= tol &&
         std::abs(p[3] - 1.0) <= tol;
}

}  // namespace gates

class Statevector {
 public:
  explicit Statevector(std::size_t num_qubits) : num_qubits_(checked_qubits(num_qubits)) {
    amps_.assign(std::size_t{1} << num_qubits_, cplx{0});
    amps_[0] = 1.0;
  }

  Statevector(std::size_t num_qubits, std::vector<cplx> amplitudes)
      : num_qubits_(checked_qubits(num_qubits)), amps_(std::move(amplitudes)) {
    if (amps_.size() != (std::size_t{1} << num_qubits_)) {
      throw std::invalid_argument("amplitude vector length must be 2^" + std::to_string(num_qubits_));
    }
  }

  static Statevector basis(std::size_t num_qubits, std::size_t index) {
    Statevector s(num_qubits);
    if (index >= s.dim()) throw std::out_of_range("basis index out of range");
    s.amps_[0] = 0.0;
    s.amps_[index] = 1.0;
    return s;
  }

  std::size_t num_qubits() const { return num_qubits_; }
  std::size_t dim() const { return amps_.size(); }
  std::span<const cplx> amplitudes() const { return amps_; }
  const cplx& operator[](std::size_t i) const { return amps_[i]; }

  double norm_squared() const {
    double acc = 0;
    for (const auto& a : amps_) acc += std::norm(a);
    return acc;
  }

  /// Applies u to one qubit without validating u (hot path for circuits).
  void apply_unchecked(std::size_t qubit, const Mat2& u) {
    const std::size_t stride = std::size_t{1} << (num_qubits_ - 1 - qubit);
    const std::size_t n = amps_.size();
    for (std::size_t block = 0; block < n; block += 2 * stride) {
      for (std::size_t i = block; i < block + stride; ++i) {
        const cplx a0 = amps_[i];
        const cplx a1 = amps_[i + stride];
        amps_[i] = u[0] * a0 + u[1] * a1;
        amps_[i + stride] = u[2] * a0 + u[3] * a1;
      }
    }
  }

  /// Real-rotation fast path for RY.
  void apply_ry(std::size_t qubit, double angle) {
    const double c = std::cos(angle / 2), s = std::sin(angle / 2);
    const std::size_t stride = std::size_t{1} << (num_qubits_ - 1 - qubit);
    const std::size_t n = amps_.size();
    for (std::size_t block = 0; block < n; block += 2 * stride) {
      for (std::size_t i = block; i < block + stride; ++i) {
        const cplx a0 = amps_[i];
        const cplx a1 = amps_[i + stride];
        amps_[i] = c * a0 - s * a1;
        amps_[i + stride] = s * a0 + c * a1;
      }
    }
  }

  void apply_cnot_unchecked(std::size_t control, std::size_t target) {
    const std::size_t cmask = std::size_t{1} << (num_qubits_ - 1 - control);
    const std::size_t tmask = std::size_t{1} << (num_qubits_ - 1 - target);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
      if ((i & cmask) && !(i & tmask)) std::swap(amps_[i], amps_[i | tmask]);
    }
  }

  void apply(std::size_t qubit, const Mat2& u) {
    check_qubit(qubit);
    if (!gates::is_unitary(u)) throw std::invalid_argument("gate matrix is not unitary within 1e-10");
    apply_unchecked(qubit, u);
  }

  void apply_cnot(std::size_t control, std::size_t target) {
    check_qubit(control);
    check_qubit(target);
    if (control == target) throw std::invalid_argument("CNOT control and target must differ");
    apply_cnot_unchecked(control, target);
  }

  void check_qubit(std::size_t qubit) const {
    if (qubit >= num_qubits_) {
      throw std::out_of_range("qubit " + std::to_string(qubit) + " out of range for " +
                              std::to_string(num_qubits_) + " qubits");
    }
  }

 private:
  static std::size_t checked_qubits(std::size_t m) {
    if (m == 0 || m > max_qubits()) {
      throw std::invalid_argument("qubit count must be in [1, " + std::to_string(max_qubits()) + "], got " +
                                  std::to_string(m));
    }
    return m;
  }

  std::size_t num_qubits_;
  std::vector<cplx> amps_;
};

inline Statevector zero_state(std::size_t m) { return Statevector(m); }

inline Statevector apply_single_qubit(Statevector state, std::size_t qubit, const Mat2& u) {
  state.apply(qubit, u);
  return state;
}

inline Statevector apply_cnot(Statevector state, std::size_t control, std::size_t target) {
  state.apply_cnot(control, target);
  return state;
}

enum class PauliAxis { X, Y, Z };

struct PauliTerm {
  double coefficient = 1.0;
  std::vector<std::pair<std::size_t, PauliAxis>> ops;
};

struct Observable {
  std::vector<PauliTerm> terms;

  double coefficient_l1() const {
    double acc = 0;
    for (const auto& t : terms) acc += std::abs(t.coefficient);
    return acc;
  }
};

/// Sum_k Z_k over m qubits.
inline Observable sum_z(std::size_t m) {
  Observable obs;
  for (std::size_t q = 0; q < m; ++q) obs.terms.push_back({1.0, {{q, PauliAxis::Z}}});
  return obs;
}

namespace detail {

// <psi| P |psi> for a single Pauli string (unit coefficient).
inline cplx pauli_expectation(const Statevector& psi, const PauliTerm& term) {
  const std::size_t m = psi.num_qubits();
  std::size_t flip = 0, sign = 0, seen = 0;
  int num_y = 0;
  for (const auto& [q, axis] : term.ops) {
    psi.check_qubit(q);
    const std::size_t bit = std::size_t{1} << (m - 1 - q);
    if (seen & bit) throw std::invalid_argument("Pauli term repeats qubit " + std::to_string(q));
    seen |= bit;
    if (axis != PauliAxis::Z) flip |= bit;
    if (axis != PauliAxis::X) sign |= bit;
    if (axis == PauliAxis::Y) ++num_y;
  }
  // Y|b> = i (-1)^b |1-b>, so P|i> = i^{nY} (-1)^{popcount(i & sign)} |i ^ flip>.
  static constexpr std::array<cplx, 4> kIPow = {cplx{1, 0}, cplx{0, 1}, cplx{-1, 0}, cplx{0, -1}};
  const auto amps = psi.amplitudes();
  cplx acc{0};
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const cplx v = std::conj(amps[i ^ flip]) * amps[i];
    acc += (std::popcount(i & sign) & 1) ? -v : v;
  }
  return kIPow[num_y % 4] * acc;
}

}  // namespace detail

inline double expectation(const Statevector& psi, const Observable& obs) {
  if (std::abs(psi.norm_squared() - 1.0) > 1e-8) {
    throw std::invalid_argument("expectation requires a unit-norm state");
  }
  cplx acc{0};
  for (const auto& term : obs.terms) acc += term.coefficient * detail::pauli_expectation(psi, term);
  if (std::abs(acc.imag()) > 1e-8) throw std::logic_error("observable expectation is not real");
  return acc.real();
}

}  // namespace qntk
