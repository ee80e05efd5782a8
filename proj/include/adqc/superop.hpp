#pragma once

// Superoperator toolkit for detector-quench readout analysis: vectorization,
// the preparation / propagation / partial-trace / dephasing factors, channel
// composition, Pauli transfer matrices, and the effective measurement axis.
//
// Conventions, fixed here and exercised by round-trip tests:
//   - row-major vectorization            vec(rho)[d*r + c] = rho(r, c)
//   - composite ordering detector first  kron(detector_op, target_op)
//   - unitary action                     vec(U rho U^+) = kron(U, conj(U)) vec(rho)
// Index tuples written (i j k l) below mean (detector row, target row,
// detector column, target column) of a two-qubit operator.

#include "adqc/common.hpp"
#include "adqc/pauli.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <vector>

namespace adqc {

// Hilbert-space side of a vectorized operator space of the given dimension.
inline Index hilbert_side(Index dim, const std::string& what) {
  const Index side =
      static_cast<Index>(std::llround(std::sqrt(static_cast<double>(dim))));
  require(side >= 1 && side * side == dim, what);
  return side;
}

struct Superoperator {
  Eigen::MatrixXcd matrix;

  Index dim_in() const { return matrix.cols(); }
  Index dim_out() const { return matrix.rows(); }
  Index hilbert_in() const {
    return hilbert_side(dim_in(), "superoperator: input is not an operator space");
  }
  Index hilbert_out() const {
    return hilbert_side(dim_out(), "superoperator: output is not an operator space");
  }
};

inline Eigen::VectorXcd vec_rm(const Eigen::MatrixXcd& op) {
  Eigen::VectorXcd v(op.rows() * op.cols());
  for (Index r = 0; r < op.rows(); ++r)
    for (Index c = 0; c < op.cols(); ++c) v[r * op.cols() + c] = op(r, c);
  return v;
}

inline Eigen::MatrixXcd unvec_rm(const Eigen::VectorXcd& v) {
  const Index side = hilbert_side(v.size(), "unvec: length is not a square");
  Eigen::MatrixXcd op(side, side);
  for (Index r = 0; r < side; ++r)
    for (Index c = 0; c < side; ++c) op(r, c) = v[r * side + c];
  return op;
}

inline Superoperator operator*(const Superoperator& a, const Superoperator& b) {
  require(a.dim_in() == b.dim_out(),
          "superoperator: composition dimension mismatch");
  return {a.matrix * b.matrix};
}

// Channel action on a density matrix (or any operator of matching size).
// `op` is taken by value so this non-template overload stays preferred over
// std::apply, which argument-dependent lookup drags in through std::complex.
inline Eigen::MatrixXcd apply(const Superoperator& s, Eigen::MatrixXcd op) {
  require(op.rows() == op.cols() && op.size() == s.dim_in(),
          "superoperator: operand dimension mismatch");
  return unvec_rm(s.matrix * vec_rm(op));
}

// Left-identity residual: vec(I)^+ S should equal vec(I)^+ for any
// trace-preserving channel.  Returns the max-norm deviation.
inline double trace_preservation_error(const Superoperator& s) {
  const Index din = s.hilbert_in();
  const Index dout = s.hilbert_out();
  const Eigen::RowVectorXcd lhs =
      vec_rm(Eigen::MatrixXcd::Identity(dout, dout)).adjoint() * s.matrix;
  const Eigen::RowVectorXcd rhs =
      vec_rm(Eigen::MatrixXcd::Identity(din, din)).adjoint();
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

// Detector preparation: vec(rho_target) -> vec(|+><+| (x) rho_target), the
// 16x4 map with entries (1/2) delta_{jp} delta_{lq} at output tuple (i j k l).
// The uniform 1/2 on the detector indices is exactly |+><+|.
inline Superoperator s_prep() {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(16, 4);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j)
      for (Index k = 0; k < 2; ++k)
        for (Index l = 0; l < 2; ++l)
          m(8 * i + 4 * j + 2 * k + l, 2 * j + l) = 0.5;
  return {m};
}

// Partial trace over the target: the 4x16 tensor contraction
// rho_det(p, q) = sum_b rho(p b, q b).
inline Superoperator s_ptrace() {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 16);
  for (Index p = 0; p < 2; ++p)
    for (Index q = 0; q < 2; ++q)
      for (Index b = 0; b < 2; ++b)
        m(2 * p + q, 8 * p + 4 * b + 2 * q + b) = 1.0;
  return {m};
}

// Computational-basis dephasing of a detector register: keeps the diagonal
// sum_m |mm><mm| and kills every coherence.  Idempotent.
inline Superoperator s_dephasing(Index qubits = 1) {
  require(qubits >= 1 && qubits <= 4, "dephasing: unsupported register size");
  const Index d = Index(1) << qubits;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d * d, d * d);
  for (Index r = 0; r < d; ++r) m(d * r + r, d * r + r) = 1.0;
  return {m};
}

// Unitary channel rho -> U rho U^+.
inline Superoperator s_prop(const Eigen::MatrixXcd& u) {
  require(u.rows() == u.cols() && u.rows() >= 2,
          "s_prop: propagator must be square");
  const double drift =
      (u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols()))
          .cwiseAbs()
          .maxCoeff();
  require_accuracy(drift <= 1e-8, "s_prop: propagator is not unitary");
  return {kron(u, u.conjugate())};
}

namespace detail {

// exp(-i 2 pi H dt) for Hermitian H in GHz, plus the max energy seen, used
// for the step-size admission rule.
inline Eigen::MatrixXcd short_step(const Eigen::MatrixXcd& h, double dt,
                                   double* e_max) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  *e_max = std::max(*e_max, es.eigenvalues().cwiseAbs().maxCoeff());
  const Eigen::VectorXcd phases = es.eigenvalues().unaryExpr(
      [dt](double e) { return std::polar(1.0, -two_pi * e * dt); });
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

// Ordered product of short-step exponentials for a time-dependent Hamiltonian
// in GHz, evolving as exp(-i 2 pi H dt).  Each grid step applies the
// fourth-order commutator-free pair exp(-i 2 pi dt B2) exp(-i 2 pi dt B1)
// with B1 = c1 H(g1) + c2 H(g2), B2 = c2 H(g1) + c1 H(g2) sampled at the two
// Gauss nodes g of the step; a time-independent Hamiltonian is reproduced
// exactly.  Every step must satisfy dt <= 1/(40 max energy), measured as
// 2 max(|eig B1|, |eig B2|) so the time-independent case matches the plain
// spectral bound; a coarser grid aborts instead of silently losing accuracy.
inline Eigen::MatrixXcd time_ordered_propagator(
    const std::function<Eigen::MatrixXcd(double)>& hamiltonian,
    const std::vector<double>& t_grid) {
  require(t_grid.size() >= 2, "propagator: need at least two grid points");
  const double node = std::sqrt(3.0) / 6.0;
  const double c1 = 0.25 + node, c2 = 0.25 - node;
  Eigen::MatrixXcd u;
  for (size_t s = 0; s + 1 < t_grid.size(); ++s) {
    const double dt = t_grid[s + 1] - t_grid[s];
    require(dt > 0.0, "propagator: time grid must be strictly increasing");
    const double mid = 0.5 * (t_grid[s] + t_grid[s + 1]);
    const Eigen::MatrixXcd h1 = hamiltonian(mid - node * dt);
    const Eigen::MatrixXcd h2 = hamiltonian(mid + node * dt);
    require(h1.rows() == h1.cols() && h2.rows() == h1.rows() &&
                h2.cols() == h1.cols(),
            "propagator: Hamiltonian must be square with fixed dimension");
    const double scale =
        std::max(1.0, std::max(h1.cwiseAbs().maxCoeff(), h2.cwiseAbs().maxCoeff()));
    require((h1 - h1.adjoint()).cwiseAbs().maxCoeff() <= 1e-9 * scale &&
                (h2 - h2.adjoint()).cwiseAbs().maxCoeff() <= 1e-9 * scale,
            "propagator: Hamiltonian is not Hermitian");
    double e_half = 0.0;
    const Eigen::MatrixXcd first = detail::short_step(c1 * h1 + c2 * h2, dt, &e_half);
    const Eigen::MatrixXcd second = detail::short_step(c2 * h1 + c1 * h2, dt, &e_half);
    require_accuracy(40.0 * 2.0 * e_half * dt <= 1.0 + 1e-9,
                     "propagator: step exceeds 1/(40 max energy)");
    const Eigen::MatrixXcd step = second * first;
    if (s == 0) {
      u = step;
    } else {
      require(step.rows() == u.rows(),
              "propagator: Hamiltonian dimension changed along the path");
      u = Eigen::MatrixXcd(step * u);
    }
  }
  return u;
}

inline Superoperator s_prop(
    const std::function<Eigen::MatrixXcd(double)>& hamiltonian,
    const std::vector<double>& t_grid) {
  return s_prop(time_ordered_propagator(hamiltonian, t_grid));
}

// Product channel Phi_a (x) Phi_b on the composite system with a's subsystem
// outermost.  Vectorization interleaves subsystem indices, so this is not
// kron(a.matrix, b.matrix); entries are filled per index tuple instead.
inline Superoperator kron_super(const Superoperator& a, const Superoperator& b) {
  const Index ai = a.hilbert_in(), ao = a.hilbert_out();
  const Index bi = b.hilbert_in(), bo = b.hilbert_out();
  Eigen::MatrixXcd m =
      Eigen::MatrixXcd::Zero(a.dim_out() * b.dim_out(), a.dim_in() * b.dim_in());
  for (Index ar = 0; ar < ao; ++ar)
    for (Index ac = 0; ac < ao; ++ac)
      for (Index br = 0; br < bo; ++br)
        for (Index bc = 0; bc < bo; ++bc) {
          const Index row = (ar * bo + br) * (ao * bo) + (ac * bo + bc);
          for (Index pr = 0; pr < ai; ++pr)
            for (Index pc = 0; pc < ai; ++pc)
              for (Index qr = 0; qr < bi; ++qr)
                for (Index qc = 0; qc < bi; ++qc) {
                  const Index col =
                      (pr * bi + qr) * (ai * bi) + (pc * bi + qc);
                  m(row, col) = a.matrix(ar * ao + ac, pr * ai + pc) *
                                b.matrix(br * bo + bc, qr * bi + qc);
                }
        }
  return {m};
}

inline Index qubit_count(Index hilbert_dim, const std::string& what) {
  Index n = 0;
  while ((Index(1) << n) < hilbert_dim) ++n;
  require((Index(1) << n) == hilbert_dim && n >= 1, what);
  return n;
}

// Tensor string of single-qubit Paulis; the label runs base four
// (I, X, Y, Z = 0..3) with the outermost qubit in the most significant digit.
inline Eigen::MatrixXcd pauli_string(Index qubits, Index label) {
  require(qubits >= 1, "pauli string: need at least one qubit");
  require(label >= 0 && label < (Index(1) << (2 * qubits)),
          "pauli string: label out of range");
  const std::array<Eigen::Matrix2cd, 4> p = {pauli_id(), pauli_x(), pauli_y(),
                                             pauli_z()};
  Eigen::MatrixXcd out = p[(label >> (2 * (qubits - 1))) & 3];
  for (Index q = qubits - 2; q >= 0; --q)
    out = kron(out, p[(label >> (2 * q)) & 3]);
  return out;
}

// Pauli transfer matrix R(a, b) = Tr[P_a Phi(P_b)] / d_out.  Real for any
// Hermiticity-preserving map; the imaginary residue is checked and dropped.
inline Eigen::MatrixXd ptm(const Superoperator& s) {
  const Index dout = s.hilbert_out();
  const Index din = s.hilbert_in();
  const Index qout = qubit_count(dout, "ptm: output is not a qubit register");
  const Index qin = qubit_count(din, "ptm: input is not a qubit register");
  std::vector<Eigen::VectorXcd> probes;
  probes.reserve(static_cast<size_t>(s.dim_out()));
  for (Index a = 0; a < s.dim_out(); ++a)
    probes.push_back(vec_rm(pauli_string(qout, a)));
  Eigen::MatrixXd r(s.dim_out(), s.dim_in());
  double residue = 0.0;
  for (Index b = 0; b < s.dim_in(); ++b) {
    const Eigen::VectorXcd mapped = s.matrix * vec_rm(pauli_string(qin, b));
    for (Index a = 0; a < s.dim_out(); ++a) {
      const cplx val = probes[static_cast<size_t>(a)].dot(mapped) /
                       static_cast<double>(dout);
      r(a, b) = val.real();
      residue = std::max(residue, std::abs(val.imag()));
    }
  }
  require_accuracy(residue <= 1e-8, "ptm: channel does not preserve Hermiticity");
  return r;
}

// Full single-pair readout channel for an explicit two-qubit propagator:
// prepare the detector, propagate, trace out the target, dephase.
inline Superoperator compose_readout(const Eigen::MatrixXcd& u_prop) {
  require(u_prop.rows() == 4 && u_prop.cols() == 4,
          "compose_readout: expected a two-qubit propagator");
  return s_dephasing() * s_ptrace() * s_prop(u_prop) * s_prep();
}

struct ReadoutAxis {
  Eigen::Vector3d pauli = Eigen::Vector3d::Zero();  // (ZX, ZY, ZZ) row
  double theta = 0.0;     // polar angle of the measured target axis
  double phi = 0.0;       // azimuth; zero when the axis has no planar part
  double fidelity = 0.0;  // |pauli|, in [0, 1] for physical channels
};

// Effective measurement axis of a composed single-pair readout channel
// (target in, detector out, both one qubit): the detector-Z row of the Pauli
// transfer matrix against the target X, Y, Z columns.  Its direction is the
// target axis mapped onto the detector's computational basis; its norm is
// the readout fidelity.
inline ReadoutAxis readout_axis(const Superoperator& s_tot) {
  require(s_tot.dim_in() == 4 && s_tot.dim_out() == 4,
          "readout axis: expected a one-qubit to one-qubit channel");
  const Eigen::MatrixXd r = ptm(s_tot);
  ReadoutAxis out;
  out.pauli = Eigen::Vector3d(r(3, 1), r(3, 2), r(3, 3));
  out.fidelity = out.pauli.norm();
  require_accuracy(out.fidelity <= 1.0 + 1e-6,
                   "readout axis: Pauli vector norm exceeds the physical bound");
  const double planar = std::hypot(out.pauli.x(), out.pauli.y());
  if (out.fidelity > 1e-12) out.theta = std::atan2(planar, out.pauli.z());
  if (planar > 1e-12) out.phi = std::atan2(out.pauli.y(), out.pauli.x());
  return out;
}

}  // namespace adqc
