#pragma once

// Dense exact-diagonalization oracle for small chains (L <= 12).
//
// Rotated-frame Hamiltonians in GHz:
//   full (transverse-field Ising form):
//     H = -(delta/2) sum_i sigma^z_i - sum_i (detuning_i/2) sigma^z_i
//         + sum_b (coupling_b/2) sigma^x_i sigma^x_j
//   rotating-wave (XY) form:
//     H = sum_b (coupling_b/4)(sigma^x sigma^x + sigma^y sigma^y)
//         - sum_i (detuning_i/2) sigma^z_i
// Both are real symmetric in the computational basis.  States evolve as
// exp(-i 2 pi H t) via a cached eigendecomposition.

#include "adqc/chain.hpp"
#include "adqc/common.hpp"
#include "adqc/pauli.hpp"

namespace adqc {

inline constexpr Index exact_max_sites = 12;

namespace detail {

inline void check_exact_size(Index length) {
  require(length >= 2, "exact: need at least two sites");
  require(length <= exact_max_sites,
          "exact: dense oracle limited to 12 sites");
}

// Adds the sigma^x sigma^x bond terms (amplitude per flipped pair).
inline void add_xx_bonds(const EffectiveXYModel& m, double quarter_factor,
                         bool number_conserving, Eigen::MatrixXd& h) {
  const Index dim = Index(1) << m.length;
  for (Index b = 0; b < m.bond_count(); ++b) {
    const Index i = b;
    const Index j = (b + 1) % m.length;
    const Index mask = (Index(1) << i) | (Index(1) << j);
    const double amp = m.coupling[b] * quarter_factor;
    for (Index s = 0; s < dim; ++s) {
      if (number_conserving) {
        // XY hopping: only anti-aligned pairs move, matrix element 2*amp.
        const bool bi = s & (Index(1) << i);
        const bool bj = s & (Index(1) << j);
        if (bi == bj) continue;
        h(s ^ mask, s) += 2.0 * amp;
      } else {
        h(s ^ mask, s) += 2.0 * amp;
      }
    }
  }
}

}  // namespace detail

// Full transverse-field Hamiltonian, Ising (sigma^x sigma^x) coupling.
inline Eigen::MatrixXd build_tfim(const EffectiveXYModel& m) {
  detail::check_exact_size(m.length);
  const Index dim = Index(1) << m.length;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (Index s = 0; s < dim; ++s) {
    double diag = 0.0;
    for (Index i = 0; i < m.length; ++i) {
      const double sz = (s & (Index(1) << i)) ? -1.0 : 1.0;
      diag += -0.5 * (m.delta + m.detuning[i]) * sz;
    }
    h(s, s) = diag;
  }
  detail::add_xx_bonds(m, 0.25, false, h);
  return h;
}

// Rotating-wave (XY) Hamiltonian; excitation-number conserving.
inline Eigen::MatrixXd build_xy(const EffectiveXYModel& m) {
  detail::check_exact_size(m.length);
  const Index dim = Index(1) << m.length;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (Index s = 0; s < dim; ++s) {
    double diag = 0.0;
    for (Index i = 0; i < m.length; ++i) {
      const double sz = (s & (Index(1) << i)) ? -1.0 : 1.0;
      diag += -0.5 * m.detuning[i] * sz;
    }
    h(s, s) = diag;
  }
  detail::add_xx_bonds(m, 0.25, true, h);
  return h;
}

// Cached eigendecomposition; evolve as V exp(-i 2 pi E t) V^T psi0.
class EigenPropagator {
 public:
  explicit EigenPropagator(const Eigen::MatrixXd& h) {
    require(h.rows() == h.cols(), "propagator: matrix must be square");
    require_accuracy((h - h.transpose()).cwiseAbs().maxCoeff() <
                         1e-10 * std::max(1.0, h.cwiseAbs().maxCoeff()),
                     "propagator: Hamiltonian lost symmetry");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    require_accuracy(solver.info() == Eigen::Success,
                     "propagator: eigendecomposition failed");
    evals_ = solver.eigenvalues();
    evecs_ = solver.eigenvectors();
  }

  const Eigen::VectorXd& eigenvalues() const { return evals_; }

  Eigen::VectorXcd evolve(const Eigen::VectorXcd& psi0, double t) const {
    require_domain(t >= 0.0, "propagator: time must be non-negative");
    require(psi0.size() == evals_.size(), "propagator: state size mismatch");
    Eigen::VectorXcd coeff = evecs_.transpose() * psi0;
    for (Index k = 0; k < coeff.size(); ++k)
      coeff[k] *= std::exp(cplx(0, -two_pi * evals_[k] * t));
    Eigen::VectorXcd psi = evecs_ * coeff;
    require_accuracy(std::abs(psi.norm() - psi0.norm()) < 1e-9,
                     "propagator: evolution lost normalization");
    return psi;
  }

 private:
  Eigen::VectorXd evals_;
  Eigen::MatrixXd evecs_;
};

// Worst-case rotating-wave error: max over sites and times of the difference
// in <sigma^z_i> between the full and XY evolutions of the same state.
inline double rwa_error(const EffectiveXYModel& m, const Eigen::VectorXcd& psi0,
                        const Eigen::VectorXd& t_grid) {
  require(t_grid.size() > 0, "rwa_error: empty time grid");
  const EigenPropagator full(build_tfim(m));
  const EigenPropagator xy(build_xy(m));
  double worst = 0.0;
  for (Index it = 0; it < t_grid.size(); ++it) {
    const Eigen::VectorXcd a = full.evolve(psi0, t_grid[it]);
    const Eigen::VectorXcd b = xy.evolve(psi0, t_grid[it]);
    for (int i = 0; i < m.length; ++i)
      worst = std::max(worst, std::abs(expect_sz(a, i) - expect_sz(b, i)));
  }
  return worst;
}

}  // namespace adqc
