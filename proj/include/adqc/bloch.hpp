#pragma once

// Closed-form single-qubit dynamics under H = -(delta/2) sigma^z with
// relaxation and pure dephasing, and the tilted-axis magnetization model
// used to calibrate source and detector angles.

#include "adqc/common.hpp"
#include "adqc/noise.hpp"

namespace adqc {

// Bloch-vector solution of the master equation.  The transverse components
// precess clockwise, (1,0,0) -> (0,-1,0) after a quarter period, and decay
// with T2; n_z relaxes to +1 with T1.
inline BlochState bloch_evolve(const BlochState& n0, double delta,
                               const NoiseParams& noise, double t) {
  require_domain(t >= 0.0, "bloch_evolve: time must be non-negative");
  const double w = two_pi * delta;
  const double c = std::cos(w * t);
  const double s = std::sin(w * t);
  const double e2 = std::exp(-t / noise.t2());
  const double e1 = std::exp(-t / noise.t1);
  BlochState out;
  out.n.x() = (n0.n.x() * c + n0.n.y() * s) * e2;
  out.n.y() = (-n0.n.x() * s + n0.n.y() * c) * e2;
  out.n.z() = 1.0 - (1.0 - n0.n.z()) * e1;
  return out;
}

// Expected magnetization along a tilted detector axis for a source state
// prepared at t0 along (theta_s, phi_s):
//
//   m(t) = cos(theta_d) [1 - e^{-(t-t0)/T1} (1 - cos(theta_s))]
//        + sin(theta_d) sin(theta_s)
//          cos[2 pi delta (t-t0) + phi_s - phi_d] e^{-(t-t0)/T2}
//
// Azimuth convention: phi_s and phi_d enter as accumulated precession
// phases (the hardware realizes them as timing offsets), which is the
// *negative* of the geometric Bloch-sphere azimuth of the corresponding
// axis.  An equivalent density-matrix computation therefore prepares
// |theta_s, -phi_s> and measures n.sigma along (theta_d, -phi_d); the unit
// tests pin this equivalence against the master-equation integrator.
inline double larmor_magnetization(const BlochAxis& source,
                                   const BlochAxis& detector, double delta,
                                   const NoiseParams& noise, double t,
                                   double t0 = 0.0) {
  require_domain(t >= t0, "larmor_magnetization: t must not precede t0");
  const double tau = t - t0;
  const double e1 = std::exp(-tau / noise.t1);
  const double e2 = std::exp(-tau / noise.t2());
  const double longitudinal =
      std::cos(detector.theta) * (1.0 - e1 * (1.0 - std::cos(source.theta)));
  const double transverse =
      std::sin(detector.theta) * std::sin(source.theta) *
      std::cos(two_pi * delta * tau + source.phi - detector.phi) * e2;
  return longitudinal + transverse;
}

// Preparation-error symmetrization.  A measurement is repeated with the
// source polarizing field reversed, which maps theta_s -> pi - theta_s and
// phi_s -> phi_s + pi; under this transform the source-dependent part of the
// signal is odd while preparation offsets are even.  Sign convention:
// run_a is the unflipped series, odd = (a - b)/2, even = (a + b)/2.
enum class SpamComponent { odd, even };

inline Eigen::VectorXd spam_symmetrize(const Eigen::VectorXd& run_a,
                                       const Eigen::VectorXd& run_b,
                                       SpamComponent component) {
  require(run_a.size() == run_b.size(),
          "spam_symmetrize: series length mismatch");
  if (component == SpamComponent::odd) return 0.5 * (run_a - run_b);
  return 0.5 * (run_a + run_b);
}

}  // namespace adqc
