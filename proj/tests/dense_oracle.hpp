#pragma once

// Independent dense-matrix reference for the simulator. Everything here is
// built from explicit Kronecker products, never from Statevector kernels.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <vector>

#include "qntk/circuits.hpp"
#include "qntk/statevector.hpp"

namespace qntk::oracle {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

inline CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline CMat to_mat(const Mat2& u) {
  CMat m(2, 2);
  m << u[0], u[1], u[2], u[3];
  return m;
}

/// I x ... x u (on `qubit`) x ... x I with qubit 0 leftmost.
inline CMat embed(const CMat& u, std::size_t qubit, std::size_t m) {
  CMat out = CMat::Identity(1, 1);
  for (std::size_t q = 0; q < m; ++q) out = kron(out, q == qubit ? u : CMat(CMat::Identity(2, 2)));
  return out;
}

/// |0><0| x I + |1><1| x X, placed on (control, target).
inline CMat cnot(std::size_t control, std::size_t target, std::size_t m) {
  CMat p0 = CMat::Zero(2, 2), p1 = CMat::Zero(2, 2);
  p0(0, 0) = 1;
  p1(1, 1) = 1;
  CMat a = CMat::Identity(1, 1), b = CMat::Identity(1, 1);
  for (std::size_t q = 0; q < m; ++q) {
    const CMat id = CMat::Identity(2, 2);
    a = kron(a, q == control ? p0 : id);
    b = kron(b, q == control ? p1 : (q == target ? to_mat(gates::pauli_x()) : id));
  }
  return a + b;
}

inline CMat pauli(PauliAxis axis) {
  CMat p(2, 2);
  switch (axis) {
    case PauliAxis::X: p << 0, 1, 1, 0; break;
    case PauliAxis::Y: p << 0, std::complex<double>(0, -1), std::complex<double>(0, 1), 0; break;
    case PauliAxis::Z: p << 1, 0, 0, -1; break;
  }
  return p;
}

inline CMat dense(const Observable& obs, std::size_t m) {
  const Eigen::Index dim = Eigen::Index{1} << m;
  CMat out = CMat::Zero(dim, dim);
  for (const auto& term : obs.terms) {
    CMat t = CMat::Identity(dim, dim);
    for (const auto& [q, axis] : term.ops) t = embed(pauli(axis), q, m) * t;
    out += term.coefficient * t;
  }
  return out;
}

inline double ground_energy(const Observable& obs, std::size_t m) {
  Eigen::SelfAdjointEigenSolver<CMat> es(dense(obs, m));
  return es.eigenvalues().minCoeff();
}

inline double max_energy(const Observable& obs, std::size_t m) {
  Eigen::SelfAdjointEigenSolver<CMat> es(dense(obs, m));
  return es.eigenvalues().maxCoeff();
}

inline CVec to_vec(const Statevector& s) {
  CVec v(static_cast<Eigen::Index>(s.dim()));
  for (std::size_t i = 0; i < s.dim(); ++i) v(static_cast<Eigen::Index>(i)) = s[i];
  return v;
}

/// Dense unitary of a fully bound gate program.
inline CMat unitary(const std::vector<GateSpec>& program, const std::vector<double>& theta, std::size_t m) {
  const Eigen::Index dim = Eigen::Index{1} << m;
  CMat u = CMat::Identity(dim, dim);
  for (const auto& g : program) {
    if (g.kind == GateKind::CNOT) {
      u = cnot(g.qubits[0], g.qubits[1], m) * u;
      continue;
    }
    std::array<double, 3> a = g.angles;
    if (g.trainable())
      for (std::size_t k = 0; k < g.num_angles(); ++k) a[k] = theta[g.slot + k];
    Mat2 one;
    switch (g.kind) {
      case GateKind::RX: one = gates::rx(a[0]); break;
      case GateKind::RY: one = gates::ry(a[0]); break;
      case GateKind::RZ: one = gates::rz(a[0]); break;
      case GateKind::ROT: one = gates::rot(a[0], a[1], a[2]); break;
      default: one = gates::hadamard(); break;
    }
    u = embed(to_mat(one), g.qubits[0], m) * u;
  }
  return u;
}

}  // namespace qntk::oracle
