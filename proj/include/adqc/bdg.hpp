#pragma once

// Free-fermion engine for transverse-field chains.  In the rotated frame the
// chain is the TFIM
//   H = -1/2 sum_i A_i sigma^z_i + sum_b (J_b/2) sigma^x_b sigma^x_{b+1},
// and the Jordan-Wigner map with sigma^z_i = 1 - 2 c^dag_i c_i turns it into
// quadratic fermions,
//   H = sum_i A_i n_i
//     + sum_b (J_b/2)(c^dag_b c_{b+1} + c^dag_b c^dag_{b+1} + h.c.) + const.
// In Nambu form H = 1/2 (c^dag, c) H_BdG (c; c^dag) + const with
//   H_BdG = [[M, N], [-N, -M]],  M_ii = A_i,  M_{b,b+1} = J_b/2 = N_{b,b+1},
// M symmetric, N antisymmetric.  On a ring the Jordan-Wigner string wraps:
// the bond (L-1, 0) picks up a factor -P, so even- and odd-parity states see
// different quadratic Hamiltonians, selected here by ParitySector.
//
// States are tracked as the L columns (u_mu; v_mu) of a Bogoliubov frame,
// evolving by (u; v)(t) = exp(-i 2 pi H_BdG t) (u; v)(0); site occupations
// are sum_mu |v_{i mu}|^2 and tau^x_i = 1 - 2 n_i.  Everything scales as
// L^3, independent of the exponential many-body dimension.

#include "adqc/chain.hpp"
#include "adqc/common.hpp"
#include "adqc/pfaffian.hpp"
#include "adqc/spacetime.hpp"

#include <vector>

namespace adqc {

struct BdGSystem {
  Eigen::VectorXd site_energy;    // A_i, GHz
  Eigen::VectorXd bond_coupling;  // J_b, GHz; L bonds when periodic, else L-1
  bool periodic = true;

  Index length() const { return site_energy.size(); }
  Index bond_count() const { return periodic ? length() : length() - 1; }

  void validate() const {
    require(length() >= 2, "bdg: need at least two sites");
    require(bond_coupling.size() == bond_count(), "bdg: bond count mismatch");
    require(site_energy.allFinite() && bond_coupling.allFinite(),
            "bdg: parameters must be finite");
  }

  static BdGSystem uniform(Index length, double delta, double coupling,
                           bool periodic = true) {
    require(length >= 2, "bdg: need at least two sites");
    BdGSystem s;
    s.periodic = periodic;
    s.site_energy = Eigen::VectorXd::Constant(length, delta);
    s.bond_coupling =
        Eigen::VectorXd::Constant(periodic ? length : length - 1, coupling);
    return s;
  }

  static BdGSystem from_model(const EffectiveXYModel& m) {
    BdGSystem s;
    s.periodic = m.periodic;
    s.site_energy = Eigen::VectorXd::Constant(m.length, m.delta) + m.detuning;
    s.bond_coupling = m.coupling;
    s.validate();
    return s;
  }
};

// Fermion-parity sector fixing the sign of the wrap bond.  Pi-pulse product
// states with an even excitation count live in `even`; a single excitation
// lives in `odd`.  Irrelevant for open chains.
enum class ParitySector { even, odd };

inline Eigen::MatrixXd build_bdg(const BdGSystem& sys,
                                 ParitySector sector = ParitySector::even) {
  sys.validate();
  const Index n = sys.length();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd nn = Eigen::MatrixXd::Zero(n, n);
  m.diagonal() = sys.site_energy;
  for (Index b = 0; b < sys.bond_count(); ++b) {
    const Index i = b;
    const Index j = (b + 1) % n;
    double amp = 0.5 * sys.bond_coupling[b];
    // Wrap bond: sigma^x_{L-1} sigma^x_0 maps to -P times the bulk form.
    if (sys.periodic && j != b + 1 && sector == ParitySector::even) amp = -amp;
    m(i, j) += amp;
    m(j, i) += amp;
    nn(i, j) += amp;
    nn(j, i) -= amp;
  }
  Eigen::MatrixXd h(2 * n, 2 * n);
  h << m, nn, -nn, -m;
  return h;
}

struct BdGState {
  Eigen::MatrixXcd u, v;  // L x L, columns are Bogoliubov modes

  Index sites() const { return u.rows(); }

  void validate() const {
    require(u.rows() == u.cols() && v.rows() == v.cols() &&
                u.rows() == v.rows(),
            "bdg state: u and v must be square and equally sized");
  }

  // Max-norm deviation of the completed frame [[u, conj(v)], [v, conj(u)]]
  // from unitarity.  The conjugate columns are the particle-hole images of
  // the tracked ones; for H_BdG = [[M, N], [-N, -M]] the Nambu evolution
  // maps completed frames to completed frames, so any deviation here is
  // numerical drift.
  double unitarity_error() const {
    validate();
    const Index n = sites();
    Eigen::MatrixXcd t(2 * n, 2 * n);
    t << u, v.conjugate(), v, u.conjugate();
    return (t.adjoint() * t - Eigen::MatrixXcd::Identity(2 * n, 2 * n))
        .cwiseAbs()
        .maxCoeff();
  }
};

namespace detail {

// Diagonal Bogoliubov frame of a product state: ground site -> u_ii = 1,
// excited site -> v_ii = 1, so occupations sum_mu |v_{i mu}|^2 start at one
// exactly on the excited sites.
inline BdGState product_frame(Index length, const std::vector<Index>& excited) {
  std::vector<bool> exc(static_cast<size_t>(length), false);
  for (Index site : excited) {
    require(site >= 0 && site < length, "bdg init: site index out of range");
    require(!exc[static_cast<size_t>(site)], "bdg init: duplicate site");
    exc[static_cast<size_t>(site)] = true;
  }
  BdGState s;
  s.u = Eigen::MatrixXcd::Zero(length, length);
  s.v = Eigen::MatrixXcd::Zero(length, length);
  for (Index i = 0; i < length; ++i)
    (exc[static_cast<size_t>(i)] ? s.v : s.u)(i, i) = 1.0;
  return s;
}

}  // namespace detail

// Product state after pi pulses on `excited`.  The count must be even: these
// states live in the even-parity sector the default build_bdg targets.
inline BdGState init_pi_pulses(const BdGSystem& sys,
                               const std::vector<Index>& excited) {
  sys.validate();
  require(excited.size() % 2 == 0,
          "bdg init: pi-pulse site count must be even (even-parity sector)");
  return detail::product_frame(sys.length(), excited);
}

// Single excitation (odd-parity sector; pair with
// build_bdg(sys, ParitySector::odd)).
inline BdGState init_single_excitation(const BdGSystem& sys, Index site) {
  sys.validate();
  return detail::product_frame(sys.length(), {site});
}

inline Eigen::VectorXd occupations(const BdGState& s) {
  s.validate();
  return s.v.cwiseAbs2().rowwise().sum();
}

inline Eigen::VectorXd measure_tau_x(const BdGState& s) {
  return Eigen::VectorXd::Ones(s.sites()) - 2.0 * occupations(s);
}

// One-time eigendecomposition of H_BdG; evolutions at any t are then two
// dense multiplies.
class BdGPropagator {
 public:
  explicit BdGPropagator(const Eigen::MatrixXd& h_bdg) {
    const Index n = h_bdg.rows();
    require(h_bdg.cols() == n && n >= 2 && n % 2 == 0,
            "bdg propagator: H_BdG must be square with even dimension");
    require((h_bdg - h_bdg.transpose()).cwiseAbs().maxCoeff() <= 1e-10,
            "bdg propagator: H_BdG must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h_bdg);
    require_accuracy(es.info() == Eigen::Success,
                     "bdg propagator: eigendecomposition failed");
    evals_ = es.eigenvalues();
    evecs_ = es.eigenvectors();
  }

  const Eigen::VectorXd& eigenvalues() const { return evals_; }
  const Eigen::MatrixXd& eigenvectors() const { return evecs_; }
  Index sites() const { return evals_.size() / 2; }

  // (u; v)(t) = Phi exp(-i 2 pi eps t) Phi^T (u; v)(0), kept as four real
  // products.
  BdGState evolve(const BdGState& s0, double t) const {
    s0.validate();
    const Index n = sites();
    require(s0.sites() == n, "bdg evolve: state size mismatch");
    require_domain(t >= 0.0 && std::isfinite(t),
                   "bdg evolve: time must be nonnegative and finite");
    Eigen::MatrixXd xr(2 * n, n), xi(2 * n, n);
    xr << s0.u.real(), s0.v.real();
    xi << s0.u.imag(), s0.v.imag();
    Eigen::MatrixXd cr = evecs_.transpose() * xr;
    Eigen::MatrixXd cm = evecs_.transpose() * xi;
    const Eigen::ArrayXd cs = (two_pi * t * evals_.array()).cos();
    const Eigen::ArrayXd sn = (two_pi * t * evals_.array()).sin();
    // Row nu picks up exp(-i theta_nu).
    Eigen::MatrixXd rr = (cr.array().colwise() * cs).matrix() +
                         (cm.array().colwise() * sn).matrix();
    Eigen::MatrixXd ri = (cm.array().colwise() * cs).matrix() -
                         (cr.array().colwise() * sn).matrix();
    xr.noalias() = evecs_ * rr;
    xi.noalias() = evecs_ * ri;
    BdGState out;
    out.u.resize(n, n);
    out.v.resize(n, n);
    out.u.real() = xr.topRows(n);
    out.u.imag() = xi.topRows(n);
    out.v.real() = xr.bottomRows(n);
    out.v.imag() = xi.bottomRows(n);
    return out;
  }

  // Site occupations over a time grid for a diagonal product-state frame,
  // skipping the u block entirely: L x T, column per grid point.
  Eigen::MatrixXd occupation_series(const std::vector<Index>& excited,
                                    const std::vector<double>& t_grid) const {
    const Index n = sites();
    require(!t_grid.empty(), "bdg series: empty time grid");
    std::vector<bool> exc(static_cast<size_t>(n), false);
    for (Index site : excited) {
      require(site >= 0 && site < n, "bdg series: site index out of range");
      exc[static_cast<size_t>(site)] = true;
    }
    // Column mu of (u0; v0) is a Nambu unit vector, so the mode coefficients
    // are just rows of Phi.
    Eigen::MatrixXd coef(2 * n, n);
    for (Index mu = 0; mu < n; ++mu)
      coef.col(mu) =
          evecs_.row(exc[static_cast<size_t>(mu)] ? mu + n : mu).transpose();
    const Eigen::MatrixXd bottom = evecs_.bottomRows(n);
    Eigen::MatrixXd occ(n, static_cast<Index>(t_grid.size()));
    Eigen::MatrixXd vr(n, n), vi(n, n);
    for (size_t ti = 0; ti < t_grid.size(); ++ti) {
      require_domain(t_grid[ti] >= 0.0 && std::isfinite(t_grid[ti]),
                     "bdg series: times must be nonnegative and finite");
      const Eigen::ArrayXd cs = (two_pi * t_grid[ti] * evals_.array()).cos();
      const Eigen::ArrayXd sn = (two_pi * t_grid[ti] * evals_.array()).sin();
      vr.noalias() = bottom * (coef.array().colwise() * cs).matrix();
      vi.noalias() = bottom * (coef.array().colwise() * sn).matrix();
      occ.col(static_cast<Index>(ti)) =
          (vr.cwiseAbs2() + vi.cwiseAbs2()).rowwise().sum();
    }
    return occ;
  }

 private:
  Eigen::VectorXd evals_;
  Eigen::MatrixXd evecs_;
};

inline BdGState evolve_bdg(const BdGPropagator& prop, const BdGState& s0,
                           double t) {
  BdGState out = prop.evolve(s0, t);
  require_accuracy(out.unitarity_error() <= 1e-9,
                   "bdg evolve: Bogoliubov frame lost unitarity");
  return out;
}

// Excitation-density field rho(n, t) for a single excitation launched on
// `site` of a clean or disordered chain (odd-parity sector, exact).
inline SpaceTimeField excitation_field(const BdGSystem& sys, Index site,
                                       double dt, Index steps) {
  require(dt > 0.0 && std::isfinite(dt), "excitation field: dt must be > 0");
  require(steps >= 2, "excitation field: need at least two steps");
  const BdGPropagator prop(build_bdg(sys, ParitySector::odd));
  require(site >= 0 && site < sys.length(),
          "excitation field: site out of range");
  std::vector<double> grid(static_cast<size_t>(steps));
  for (Index s = 0; s < steps; ++s)
    grid[static_cast<size_t>(s)] = dt * static_cast<double>(s);
  SpaceTimeField f;
  f.values = prop.occupation_series({site}, grid);
  f.dt = dt;
  f.basis = FieldBasis::z;
  f.validate();
  return f;
}

// Transverse-magnetization field m_x(n, t) = <sigma^x_n(t)> for the state
// (1 + sigma^x_0)|0...0> / sqrt(2).
//
// sigma^x_n maps to a string of 2n+1 Majoranas, and the initial state adds
// one more through c^dag_0, so m_x(n, t) = Re[(-i)^n Pf(C)] with C the
// (2n+2)-dimensional matrix of Wick contractions in the all-ground Gaussian
// state: C_{pq} = i S_{pq} between evolved Majoranas (S = R Sigma0 R^T) and
// C_{p,last} = R_{p0} - i R_{p1} against c^dag_0.
//
// Both parity components are evolved with the odd-sector H_BdG; on a ring
// the even (vacuum) component actually sees the flipped wrap bond, so this
// is exact for open chains but approximate on rings.  The wrap bond sits
// next to the seeded site, so the ring error is local in origin and does
// not shrink with L: worst-case ~0.13 in amplitude at coupling -0.60
// (measured L = 8..12 against the dense oracle).  Mode frequencies still
// come from the exact odd-sector spectrum, so ridge positions extracted
// from this field are unaffected.
inline SpaceTimeField x_basis_field(const BdGSystem& sys, double dt,
                                    Index steps) {
  require(dt > 0.0 && std::isfinite(dt), "x field: dt must be > 0");
  require(steps >= 2, "x field: need at least two steps");
  const Index n = sys.length();
  const BdGPropagator prop(build_bdg(sys, ParitySector::odd));

  // Majorana change of basis a = Omega (c; c^dag): a_{2j} = c_j + c^dag_j,
  // a_{2j+1} = -i (c_j - c^dag_j).  G = Omega Phi, assembled row by row.
  Eigen::MatrixXcd g(2 * n, 2 * n);
  const Eigen::MatrixXd& phi = prop.eigenvectors();
  for (Index j = 0; j < n; ++j) {
    g.row(2 * j) = (phi.row(j) + phi.row(j + n)).cast<cplx>();
    g.row(2 * j + 1) = ci * (phi.row(j + n) - phi.row(j)).cast<cplx>();
  }

  SpaceTimeField f;
  f.values.resize(n, steps);
  f.dt = dt;
  f.basis = FieldBasis::x;

  const cplx minus_i_pow[4] = {cplx(1, 0), cplx(0, -1), cplx(-1, 0),
                               cplx(0, 1)};
  Eigen::VectorXcd phases(2 * n);
  Eigen::MatrixXcd rc(2 * n, 2 * n);
  Eigen::MatrixXd r(2 * n, 2 * n), rs(2 * n, 2 * n), s(2 * n, 2 * n);
  for (Index ti = 0; ti < steps; ++ti) {
    const double t = dt * static_cast<double>(ti);
    for (Index nu = 0; nu < 2 * n; ++nu) {
      const double th = two_pi * t * prop.eigenvalues()[nu];
      phases[nu] = cplx(std::cos(th), -std::sin(th));
    }
    // Majorana rotation R(t) = Omega W(t) Omega^dag / 2, real orthogonal.
    rc.noalias() = g * phases.asDiagonal() * g.adjoint() * 0.5;
    require_accuracy(rc.imag().cwiseAbs().maxCoeff() <= 1e-9,
                     "x field: Majorana rotation not real");
    r = rc.real();
    // S = R Sigma0 R^T with Sigma0 = blockdiag [[0, 1], [-1, 0]].
    for (Index j = 0; j < n; ++j) {
      rs.col(2 * j) = -r.col(2 * j + 1);
      rs.col(2 * j + 1) = r.col(2 * j);
    }
    s.noalias() = rs * r.transpose();

    for (Index site = 0; site < n; ++site) {
      const Index m = 2 * site + 2;
      Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(m, m);
      for (Index p = 0; p + 1 < m; ++p)
        for (Index q = p + 1; q + 1 < m; ++q) c(p, q) = ci * s(p, q);
      for (Index p = 0; p + 1 < m; ++p)
        c(p, m - 1) = cplx(r(p, 0), -r(p, 1));
      f.values(site, ti) =
          (minus_i_pow[static_cast<size_t>(site % 4)] * pfaffian(std::move(c)))
              .real();
    }
  }
  f.validate();
  return f;
}

}  // namespace adqc
