#pragma once

// Single-qubit algebra and bit-indexed many-body helpers.
//
// Basis conventions: |0> is the sigma^z = +1 state (the T1 fixed point),
// site i of an L-site register maps to bit i of the basis index, so
// |b_{L-1} ... b_1 b_0> has index sum_i b_i 2^i.  Lab frame operators are
// written tau, the rotated frame sigma; the two are related by
// sigma^x = -tau^z, sigma^y = tau^y, sigma^z = tau^x.

#include "adqc/common.hpp"

namespace adqc {

inline Eigen::Matrix2cd pauli_x() {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return m;
}

inline Eigen::Matrix2cd pauli_y() {
  Eigen::Matrix2cd m;
  m << cplx(0, 0), cplx(0, -1), cplx(0, 1), cplx(0, 0);
  return m;
}

inline Eigen::Matrix2cd pauli_z() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}

inline Eigen::Matrix2cd pauli_id() { return Eigen::Matrix2cd::Identity(); }

// Lowering operator |0><1|: relaxes the excited sigma^z = -1 state.
inline Eigen::Matrix2cd sigma_minus() {
  Eigen::Matrix2cd m;
  m << 0, 1, 0, 0;
  return m;
}

// Unit Bloch vector for polar/azimuthal detector or source angles.
inline Eigen::Vector3d bloch_axis(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
          std::cos(theta)};
}

// Pure state along (theta, phi): cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>.
inline Eigen::Vector2cd axis_state(double theta, double phi) {
  return {cplx(std::cos(theta / 2), 0),
          std::exp(cplx(0, phi)) * std::sin(theta / 2)};
}

// n . sigma for a unit axis.
inline Eigen::Matrix2cd axis_operator(double theta, double phi) {
  const Eigen::Vector3d n = bloch_axis(theta, phi);
  return n.x() * pauli_x() + n.y() * pauli_y() + n.z() * pauli_z();
}

inline Eigen::Matrix2cd density_from_bloch(const Eigen::Vector3d& n) {
  return 0.5 * (pauli_id() + n.x() * pauli_x() + n.y() * pauli_y() +
                n.z() * pauli_z());
}

inline Eigen::Vector3d bloch_from_density(const Eigen::Matrix2cd& rho) {
  return {(rho * pauli_x()).trace().real(), (rho * pauli_y()).trace().real(),
          (rho * pauli_z()).trace().real()};
}

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a,
                             const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Single-site rotation taking lab-frame states to the rotated frame:
// R tau^x R^+ = Z, R tau^y R^+ = Y, R tau^z R^+ = -X.
inline Eigen::Matrix2cd lab_to_rotated_1q() {
  Eigen::Matrix2cd r;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  r << inv_sqrt2, inv_sqrt2, -inv_sqrt2, inv_sqrt2;
  return r;
}

// Apply a one-qubit gate to the given site of a register state in place.
inline void apply_single_qubit(const Eigen::Matrix2cd& u, int site,
                               Eigen::VectorXcd& psi) {
  const Index dim = psi.size();
  const Index bit = Index(1) << site;
  require(bit < dim, "apply_single_qubit: site outside register");
  for (Index b = 0; b < dim; ++b) {
    if (b & bit) continue;
    const cplx lo = psi[b];
    const cplx hi = psi[b | bit];
    psi[b] = u(0, 0) * lo + u(0, 1) * hi;
    psi[b | bit] = u(1, 0) * lo + u(1, 1) * hi;
  }
}

inline Eigen::VectorXcd to_rotated_basis(Eigen::VectorXcd psi_lab, int length) {
  const Eigen::Matrix2cd r = lab_to_rotated_1q();
  for (int i = 0; i < length; ++i) apply_single_qubit(r, i, psi_lab);
  return psi_lab;
}

inline Eigen::VectorXcd to_lab_basis(Eigen::VectorXcd psi_rot, int length) {
  const Eigen::Matrix2cd r = lab_to_rotated_1q().adjoint();
  for (int i = 0; i < length; ++i) apply_single_qubit(r, i, psi_rot);
  return psi_rot;
}

// <sigma^z_site> of a register state, by bit arithmetic.
inline double expect_sz(const Eigen::VectorXcd& psi, int site) {
  const Index bit = Index(1) << site;
  double v = 0.0;
  for (Index b = 0; b < psi.size(); ++b)
    v += ((b & bit) ? -1.0 : 1.0) * std::norm(psi[b]);
  return v;
}

inline double expect_szsz(const Eigen::VectorXcd& psi, int site_a, int site_b) {
  const Index bit_a = Index(1) << site_a;
  const Index bit_b = Index(1) << site_b;
  double v = 0.0;
  for (Index b = 0; b < psi.size(); ++b) {
    const double sa = (b & bit_a) ? -1.0 : 1.0;
    const double sb = (b & bit_b) ? -1.0 : 1.0;
    v += sa * sb * std::norm(psi[b]);
  }
  return v;
}

inline Eigen::VectorXcd apply_sigma_x(const Eigen::VectorXcd& psi, int site) {
  const Index bit = Index(1) << site;
  Eigen::VectorXcd out(psi.size());
  for (Index b = 0; b < psi.size(); ++b) out[b ^ bit] = psi[b];
  return out;
}

// Product basis state with the given excited sites (bits set to |1>).
inline Eigen::VectorXcd basis_state(int length,
                                    const std::vector<int>& excited) {
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(Index(1) << length);
  Index idx = 0;
  for (int site : excited) {
    require(site >= 0 && site < length, "basis_state: site outside register");
    idx |= Index(1) << site;
  }
  psi[idx] = 1.0;
  return psi;
}

}  // namespace adqc
