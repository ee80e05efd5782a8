#pragma once

// Fixed-step master-equation integrator for small open systems,
//
//   d rho / dt = -i 2 pi [H, rho]
//              + sum_k gamma_k ( L_k rho L_k^+ - 1/2 {L_k^+ L_k, rho} ),
//
// with H in GHz, rates in 1/ns and times in ns.  The stepper is classical
// RK4 with a step chosen from the spectral extent of the generator, which
// keeps trajectories reproducible bit for bit across runs; adaptivity is
// deliberately avoided.

#include <utility>
#include <vector>

#include "adqc/common.hpp"
#include "adqc/noise.hpp"
#include "adqc/pauli.hpp"

namespace adqc {

struct JumpOp {
  Eigen::MatrixXcd op;
  double rate = 0.0;  // 1/ns, multiplies the dissipator of `op`
};

struct LindbladOptions {
  // Hard cap on the internal step in ns; the accuracy-based choice below
  // usually binds first.
  double max_step = inf;
  // Internal step is at most accuracy_factor / E_max with E_max a Gershgorin
  // bound on |H| in GHz.  The default keeps the global RK4 error of a 50 ns
  // trajectory a little below 1e-8.
  double accuracy_factor = 4e-4;
};

// Per-qubit relaxation and pure dephasing.  Channels with infinite time
// constants are dropped rather than carried at rate zero.
inline std::vector<JumpOp> single_qubit_jumps(const NoiseParams& noise) {
  std::vector<JumpOp> jumps;
  if (std::isfinite(noise.t1))
    jumps.push_back({sigma_minus(), 1.0 / noise.t1});
  if (std::isfinite(noise.tphi))
    jumps.push_back({pauli_z(), 0.5 / noise.tphi});
  return jumps;
}

// Acts `op` on one site of a register, identity elsewhere.  Site i lives on
// bit i of the basis index.
inline Eigen::MatrixXcd embed_qubit_op(const Eigen::Matrix2cd& op, int site,
                                       int n_qubits) {
  require(n_qubits >= 1 && n_qubits <= 12, "embed_qubit_op: register size");
  require(site >= 0 && site < n_qubits, "embed_qubit_op: site outside register");
  const Index dim = Index(1) << n_qubits;
  const Index bit = Index(1) << site;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  for (Index col = 0; col < dim; ++col) {
    const Index rest = col & ~bit;
    const Index b = (col & bit) ? 1 : 0;
    out(rest, col) += op(0, b);
    out(rest | bit, col) += op(1, b);
  }
  return out;
}

// Independent relaxation/dephasing on every site of an n-qubit register
// with uniform noise parameters.
inline std::vector<JumpOp> uniform_register_jumps(const NoiseParams& noise,
                                                  int n_qubits) {
  std::vector<JumpOp> jumps;
  for (int site = 0; site < n_qubits; ++site) {
    if (std::isfinite(noise.t1))
      jumps.push_back({embed_qubit_op(sigma_minus(), site, n_qubits),
                       1.0 / noise.t1});
    if (std::isfinite(noise.tphi))
      jumps.push_back({embed_qubit_op(pauli_z(), site, n_qubits),
                       0.5 / noise.tphi});
  }
  return jumps;
}

namespace detail {

// Gershgorin bound on the spectral radius of a Hermitian matrix.
inline double spectral_bound(const Eigen::MatrixXcd& h) {
  double bound = 0.0;
  for (Index i = 0; i < h.rows(); ++i)
    bound = std::max(bound, h.row(i).cwiseAbs().sum());
  return bound;
}

// RK4 trajectory with everything pre-assembled.  Mat is a concrete Eigen
// matrix type so the 2x2 and 4x4 cases run on fixed-size arithmetic; rho
// holds the state at t_grid[0] on entry.
template <class Mat>
std::vector<Eigen::MatrixXcd> run_fixed_step(
    const Mat& drift, const std::vector<std::pair<Mat, double>>& jumps,
    Mat rho, const std::vector<double>& t_grid, double base_step) {
  const auto rhs = [&](const Mat& r) {
    Mat out = drift * r;
    out += out.adjoint().eval();
    for (const auto& [l, rate] : jumps) out += rate * (l * r * l.adjoint());
    return out;
  };

  std::vector<Eigen::MatrixXcd> trajectory;
  trajectory.reserve(t_grid.size());
  trajectory.push_back(rho);
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    const double span = t_grid[i] - t_grid[i - 1];
    require_domain(span >= 0.0, "lindblad_integrate: t_grid must not decrease");
    const long n_steps =
        span > 0.0 ? std::max(1L, long(std::ceil(span / base_step))) : 0L;
    const double h = n_steps > 0 ? span / double(n_steps) : 0.0;
    for (long step = 0; step < n_steps; ++step) {
      const Mat k1 = rhs(rho);
      const Mat k2 = rhs(rho + (0.5 * h) * k1);
      const Mat k3 = rhs(rho + (0.5 * h) * k2);
      const Mat k4 = rhs(rho + h * k3);
      rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      rho = 0.5 * (rho + rho.adjoint().eval());
      require_accuracy(std::abs(rho.trace().real() - 1.0) <= 1e-9,
                       "lindblad_integrate: trace drift exceeded 1e-9");
    }
    trajectory.push_back(rho);
  }
  return trajectory;
}

template <class Mat>
std::vector<Eigen::MatrixXcd> dispatch_fixed(const Eigen::MatrixXcd& drift,
                                             const std::vector<JumpOp>& jumps,
                                             const Eigen::MatrixXcd& rho0,
                                             const std::vector<double>& t_grid,
                                             double base_step) {
  std::vector<std::pair<Mat, double>> fixed;
  fixed.reserve(jumps.size());
  for (const auto& j : jumps) fixed.emplace_back(Mat(j.op), j.rate);
  return run_fixed_step<Mat>(Mat(drift), fixed, Mat(rho0), t_grid, base_step);
}

}  // namespace detail

// Integrates the master equation through the given time grid and returns
// the state at every grid point; rho0 is the state at t_grid.front().
// Trace is monitored (not renormalized) and Hermiticity restored by
// symmetrization after every internal step.
inline std::vector<Eigen::MatrixXcd> lindblad_integrate(
    const Eigen::MatrixXcd& hamiltonian, const std::vector<JumpOp>& jumps,
    const Eigen::MatrixXcd& rho0, const std::vector<double>& t_grid,
    const LindbladOptions& opts = {}) {
  const Index dim = rho0.rows();
  require(dim >= 1 && dim <= 4096 && rho0.cols() == dim,
          "lindblad_integrate: state must be square with dimension <= 4096");
  require(hamiltonian.rows() == dim && hamiltonian.cols() == dim,
          "lindblad_integrate: Hamiltonian dimension mismatch");
  require((hamiltonian - hamiltonian.adjoint()).cwiseAbs().maxCoeff() <= 1e-10,
          "lindblad_integrate: Hamiltonian must be Hermitian");
  require((rho0 - rho0.adjoint()).cwiseAbs().maxCoeff() <= 1e-10,
          "lindblad_integrate: rho0 must be Hermitian");
  require(std::abs(rho0.trace().real() - 1.0) <= 1e-10,
          "lindblad_integrate: rho0 must have unit trace");
  {
    // Positivity to 1e-10: a shifted Cholesky factorization must succeed.
    Eigen::MatrixXcd shifted = rho0;
    shifted.diagonal().array() += 2e-10;
    require(Eigen::LLT<Eigen::MatrixXcd>(shifted).info() == Eigen::Success,
            "lindblad_integrate: rho0 must be positive semidefinite");
  }
  for (const auto& j : jumps) {
    require(j.op.rows() == dim && j.op.cols() == dim,
            "lindblad_integrate: jump operator dimension mismatch");
    require_domain(j.rate >= 0.0 && std::isfinite(j.rate),
                   "lindblad_integrate: jump rates must be finite and >= 0");
  }
  require(!t_grid.empty(), "lindblad_integrate: empty time grid");
  require_domain(opts.max_step > 0.0 && opts.accuracy_factor > 0.0,
                 "lindblad_integrate: step controls must be positive");

  // Drift part of the generator: rhs(rho) = G rho + rho G^+ + jump terms.
  Eigen::MatrixXcd drift = -ci * two_pi * hamiltonian;
  double max_rate = 0.0;
  for (const auto& j : jumps) {
    const Eigen::MatrixXcd ldl = j.op.adjoint() * j.op;
    drift -= 0.5 * j.rate * ldl;
    max_rate = std::max(max_rate, j.rate * detail::spectral_bound(ldl));
  }

  double base_step = opts.max_step;
  const double emax = detail::spectral_bound(hamiltonian);
  if (emax > 0.0) {
    base_step = std::min(base_step, opts.accuracy_factor / emax);
    base_step = std::min(base_step, 1.0 / (20.0 * emax));
  }
  if (max_rate > 0.0) base_step = std::min(base_step, 0.02 / max_rate);
  if (!std::isfinite(base_step)) {
    // Generator is numerically zero; any step reproduces the constant flow.
    base_step = 1.0;
  }

  if (dim == 2)
    return detail::dispatch_fixed<Eigen::Matrix2cd>(drift, jumps, rho0, t_grid,
                                                    base_step);
  if (dim == 4)
    return detail::dispatch_fixed<Eigen::Matrix4cd>(drift, jumps, rho0, t_grid,
                                                    base_step);
  return detail::dispatch_fixed<Eigen::MatrixXcd>(drift, jumps, rho0, t_grid,
                                                  base_step);
}

}  // namespace adqc
