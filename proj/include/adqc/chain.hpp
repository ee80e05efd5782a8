#pragma once

// Effective transverse-field / XY chain parameters derived from an annealing
// schedule held at a fixed operating point s*.
//
// Lab-frame chain Hamiltonian (tau basis, GHz):
//   H = -1/2 sum_i A(s* + s0_i) tau^x_i
//       + 1/2 sum_<ij> sqrt(B(s_i) B(s_j)) J_ij tau^z_i tau^z_j
// The rotated-frame picture uses sigma^x = -tau^z, sigma^y = tau^y,
// sigma^z = tau^x, a global splitting Delta = A(s*), per-site detunings
// dDelta_i = A(s* + s0_i) - Delta, and effective couplings
// coupling_ij = sqrt(B(s_i) B(s_j)) J_ij.

#include "adqc/common.hpp"
#include "adqc/schedule.hpp"

namespace adqc {

struct ChainSpec {
  Index length = 0;
  bool periodic = false;
  // Programmed dimensionless couplers, one per bond: length L when periodic
  // (bond b joins sites b and (b+1) mod L), L-1 when open.
  Eigen::VectorXd programmed_j;
  // Per-site anneal-parameter offsets s0_i.
  Eigen::VectorXd s_offset;
  double s_star = 0.0;
  // Longitudinal biases h_i; must stay zero (transverse-field chains only).
  Eigen::VectorXd h_bias;
  // Programmable coupler range |J| <= j_range.
  double j_range = 2.0;

  Index bond_count() const { return periodic ? length : length - 1; }

  void validate() const {
    require(length >= 2, "chain: need at least two sites");
    require(programmed_j.size() == bond_count(), "chain: coupler count mismatch");
    require(s_offset.size() == length, "chain: offset count mismatch");
    require(h_bias.size() == 0 || h_bias.size() == length,
            "chain: bias count mismatch");
    if (h_bias.size() > 0)
      require(h_bias.cwiseAbs().maxCoeff() == 0.0,
              "chain: longitudinal biases are not supported (h must be zero)");
    require_range(programmed_j.cwiseAbs().maxCoeff() <= j_range + 1e-12,
                  "chain: programmed coupler outside programmable range");
  }
};

struct EffectiveXYModel {
  Index length = 0;
  bool periodic = false;
  double delta = 0.0;            // GHz, global splitting A(s*)
  Eigen::VectorXd detuning;      // GHz, per-site dDelta_i
  Eigen::VectorXd coupling;      // GHz, per-bond effective coupling
  // Weak-coupling figure of merit max(|coupling|, |detuning|)/delta and the
  // flag marking that the XY (rotating-wave) picture is trustworthy.
  double weak_coupling_ratio = 0.0;
  bool weak_coupling = false;

  Index bond_count() const { return periodic ? length : length - 1; }

  // Uniform chain straight from effective parameters, bypassing a schedule.
  static EffectiveXYModel uniform(Index length, double delta, double coupling,
                                  bool periodic) {
    require(length >= 2, "model: need at least two sites");
    require(delta > 0.0, "model: delta must be positive");
    EffectiveXYModel m;
    m.length = length;
    m.periodic = periodic;
    m.delta = delta;
    m.detuning = Eigen::VectorXd::Zero(length);
    m.coupling = Eigen::VectorXd::Constant(m.bond_count(), coupling);
    m.weak_coupling_ratio = std::abs(coupling) / delta;
    m.weak_coupling = m.weak_coupling_ratio < 0.5;
    return m;
  }
};

inline EffectiveXYModel build_effective_model(const ChainSpec& chain,
                                              const AnnealSchedule& schedule) {
  chain.validate();
  EffectiveXYModel m;
  m.length = chain.length;
  m.periodic = chain.periodic;
  m.delta = schedule.a(chain.s_star);
  require(m.delta > 0.0, "model: A(s*) must be positive");

  m.detuning.resize(chain.length);
  Eigen::VectorXd b_site(chain.length);
  for (Index i = 0; i < chain.length; ++i) {
    const double si = chain.s_star + chain.s_offset[i];
    require_range(si >= 0.0 && si <= 1.0,
                  "model: s* + offset leaves the anneal range [0, 1]");
    m.detuning[i] = schedule.a(si) - m.delta;
    b_site[i] = schedule.b(si);
  }

  m.coupling.resize(chain.bond_count());
  for (Index b = 0; b < chain.bond_count(); ++b) {
    const Index i = b;
    const Index j = (b + 1) % chain.length;
    m.coupling[b] = std::sqrt(b_site[i] * b_site[j]) * chain.programmed_j[b];
  }

  const double det_max = m.detuning.cwiseAbs().maxCoeff();
  const double cpl_max =
      m.coupling.size() ? m.coupling.cwiseAbs().maxCoeff() : 0.0;
  m.weak_coupling_ratio = std::max(det_max, cpl_max) / m.delta;
  m.weak_coupling = m.weak_coupling_ratio < 0.5;
  return m;
}

// Programmed couplers that realize the requested effective couplings (GHz)
// at the chain's operating points; inverse of the sqrt(B_i B_j) scaling in
// build_effective_model.
inline Eigen::VectorXd compensate_couplings(const ChainSpec& chain,
                                            const AnnealSchedule& schedule,
                                            const Eigen::VectorXd& target_ghz) {
  require(target_ghz.size() == chain.bond_count(),
          "compensate: target count mismatch");
  Eigen::VectorXd b_site(chain.length);
  for (Index i = 0; i < chain.length; ++i) {
    const double si = chain.s_star + chain.s_offset[i];
    require_range(si >= 0.0 && si <= 1.0,
                  "compensate: s* + offset leaves the anneal range [0, 1]");
    b_site[i] = schedule.b(si);
    require(b_site[i] > 0.0, "compensate: B vanishes at an operating point");
  }
  Eigen::VectorXd programmed(chain.bond_count());
  for (Index b = 0; b < chain.bond_count(); ++b) {
    const Index i = b;
    const Index j = (b + 1) % chain.length;
    programmed[b] = target_ghz[b] / std::sqrt(b_site[i] * b_site[j]);
    require_range(std::abs(programmed[b]) <= chain.j_range + 1e-12,
                  "compensate: required coupler outside programmable range");
  }
  return programmed;
}

// Exact single-mode dispersion of the clean transverse-field chain,
//   E(k) = sqrt((delta + coupling*cos k)^2 + (coupling*sin k)^2)   [GHz],
// with k in radians per site.
inline double dispersion_exact(double delta, double coupling, double k) {
  const double ex = delta + coupling * std::cos(k);
  const double ey = coupling * std::sin(k);
  return std::hypot(ex, ey);
}

}  // namespace adqc
