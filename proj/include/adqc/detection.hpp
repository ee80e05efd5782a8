#pragma once

// Detector-quench readout model.  A target qubit parked at its operating
// point is read by annealing a dedicated detector qubit from s = 0 to s = 1:
// the ramp kills the detector's transverse field while the detector-target
// coupling grows with B(s), and a final computational-basis dephasing leaves
// the detector populations recording the target state along some effective
// axis.  readout_axis on the composed channel extracts that axis.
//
// Lab-frame pair Hamiltonian (tau basis, GHz, detector outer):
//   H(t) = -A(s_d(t))/2 tau^x_d  -  gap/2 tau^x_t
//          + sqrt(B(s_d(t)) B(s*)) J / 2 tau^z_d tau^z_t
//          + tilt(t)/2 tau^z_d
// with s_d(t) a linear 0 -> 1 ramp over ramp_time and s* solving A(s*) = gap.
// The tilt pulse stands in for a flux bias on the detector body; its
// amplitude and timing are free knobs (no reference data pins them) with
// defaults chosen to match the 2 ns ramp / 6 ns protocol window.

#include "adqc/schedule.hpp"
#include "adqc/superop.hpp"

#include <algorithm>

namespace adqc {

// Longitudinal detector pulse: a trapezoid with linear edges.  Positive
// amplitude lowers the energy of the |1> detector state.
struct TiltPulse {
  double amplitude = 0.0;  // GHz on tau^z_d; zero keeps flux-basis readout
  double t_on = 0.0;       // ns
  double t_off = 5.0;      // ns, back at zero here
  double edge = 0.25;      // ns linear rise and fall

  double envelope(double t) const {
    if (edge <= 0.0) return (t >= t_on && t < t_off) ? 1.0 : 0.0;
    const double up = (t - t_on) / edge;
    const double down = (t_off - t) / edge;
    return std::clamp(std::min(up, down), 0.0, 1.0);
  }

  void validate() const {
    require(t_off >= t_on, "tilt: pulse must end after it starts");
    require(edge >= 0.0, "tilt: edge time must be non-negative");
  }
};

// Readout protocol parameters.  steps == 0 lets the propagator pick a grid
// from the step-size rule and verify it by step halving; an explicit count
// skips the halving but is still held to the step-size rule.
struct DetectorQuench {
  double target_gap = 2.0;   // GHz target splitting A(s*)
  double detector_j = -1.8;  // dimensionless detector-target coupler
  double ramp_time = 2.0;    // ns linear detector ramp 0 -> 1
  double t_total = 6.0;      // ns full protocol window
  TiltPulse tilt;
  Index steps = 0;

  void validate() const {
    require(target_gap > 0.0, "quench: target gap must be positive");
    require(detector_j != 0.0, "quench: detector coupler must be nonzero");
    require(ramp_time > 0.0, "quench: ramp time must be positive");
    require(t_total >= ramp_time, "quench: protocol cannot end mid-ramp");
    require(steps >= 0, "quench: step count must be non-negative");
    tilt.validate();
  }

  double detector_s(double t) const {
    return std::clamp(t / ramp_time, 0.0, 1.0);
  }
};

// Smallest anneal parameter where the transverse field equals the requested
// gap.  A(s) is non-increasing, so bisection brackets the crossing.
inline double gap_operating_point(const AnnealSchedule& schedule,
                                  double gap_ghz) {
  require(gap_ghz > 0.0, "operating point: gap must be positive");
  require_range(gap_ghz <= schedule.a(0.0) + 1e-12 &&
                    gap_ghz >= schedule.a(1.0) - 1e-12,
                "operating point: gap outside the schedule's range");
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    (schedule.a(mid) >= gap_ghz ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Time-dependent 4x4 pair Hamiltonian (detector outer, target inner).  Owns
// copies of the schedule and protocol so it can outlive the builder call.
class PairQuenchHamiltonian {
 public:
  PairQuenchHamiltonian(const AnnealSchedule& schedule, const DetectorQuench& q)
      : schedule_(schedule), quench_(q) {
    quench_.validate();
    s_target_ = gap_operating_point(schedule_, quench_.target_gap);
    b_target_ = schedule_.b(s_target_);

    // Times where H(t) loses smoothness: the ramp end, the tilt pulse
    // corners, and every schedule-knot crossing (the tabulated A, B are only
    // C1 across knots).  Propagation grids place these on grid points so the
    // short-step scheme keeps its full order.
    breakpoints_.push_back(0.0);
    for (Index i = 0; i < schedule_.s_grid().size(); ++i) {
      const double t = schedule_.s_grid()[i] * quench_.ramp_time;
      if (t > 0.0 && t < quench_.t_total) breakpoints_.push_back(t);
    }
    if (quench_.ramp_time < quench_.t_total)
      breakpoints_.push_back(quench_.ramp_time);
    if (quench_.tilt.amplitude != 0.0) {
      const TiltPulse& p = quench_.tilt;
      for (double t : {p.t_on, p.t_on + p.edge, p.t_off - p.edge, p.t_off})
        if (t > 0.0 && t < quench_.t_total) breakpoints_.push_back(t);
    }
    breakpoints_.push_back(quench_.t_total);
    std::sort(breakpoints_.begin(), breakpoints_.end());
    std::vector<double> unique;
    for (double t : breakpoints_)
      if (unique.empty() || t - unique.back() > 1e-12) unique.push_back(t);
    breakpoints_ = std::move(unique);
  }

  // Detector-target coupling in GHz at protocol time t.
  double coupling(double t) const {
    return std::sqrt(schedule_.b(quench_.detector_s(t)) * b_target_) *
           quench_.detector_j;
  }

  Eigen::MatrixXcd operator()(double t) const {
    const double a_d = schedule_.a(quench_.detector_s(t));
    const double tilt = quench_.tilt.amplitude * quench_.tilt.envelope(t);
    const Eigen::Matrix2cd id = pauli_id(), x = pauli_x(), z = pauli_z();
    return -0.5 * a_d * kron(x, id) - 0.5 * quench_.target_gap * kron(id, x) +
           0.5 * coupling(t) * kron(z, z) + 0.5 * tilt * kron(z, id);
  }

  double s_target() const { return s_target_; }
  double b_target() const { return b_target_; }
  const DetectorQuench& quench() const { return quench_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }

 private:
  AnnealSchedule schedule_;
  DetectorQuench quench_;
  double s_target_ = 0.0;
  double b_target_ = 0.0;
  std::vector<double> breakpoints_;
};

// Two identical pairs ordered (d1, t1, d2, t2) plus a constant target-target
// coupling (GHz): H = H_pair (x) 1 + 1 (x) H_pair + coupling/2 tau^z_t1 tau^z_t2.
class TwoPairQuenchHamiltonian {
 public:
  TwoPairQuenchHamiltonian(const AnnealSchedule& schedule,
                           const DetectorQuench& q, double coupling_ghz)
      : pair_(schedule, q), coupling_(coupling_ghz) {
    const Eigen::Matrix2cd id = pauli_id(), z = pauli_z();
    zz_targets_ = kron(kron(id, z), kron(id, z));
  }

  Eigen::MatrixXcd operator()(double t) const {
    const Eigen::MatrixXcd hp = pair_(t);
    const Eigen::MatrixXcd id4 = Eigen::MatrixXcd::Identity(4, 4);
    return kron(hp, id4) + kron(id4, hp) + 0.5 * coupling_ * zz_targets_;
  }

  const PairQuenchHamiltonian& pair() const { return pair_; }
  double coupling() const { return coupling_; }
  const std::vector<double>& breakpoints() const { return pair_.breakpoints(); }

 private:
  PairQuenchHamiltonian pair_;
  double coupling_ = 0.0;
  Eigen::MatrixXcd zz_targets_;
};

namespace detail {

inline std::vector<double> uniform_grid(double t_end, Index steps) {
  std::vector<double> g(static_cast<size_t>(steps) + 1);
  for (Index s = 0; s <= steps; ++s)
    g[static_cast<size_t>(s)] =
        t_end * static_cast<double>(s) / static_cast<double>(steps);
  return g;
}

// Grid of roughly `steps` uniform steps overall that lands exactly on every
// breakpoint, keeping each step inside a smooth stretch of H(t).
inline std::vector<double> segmented_grid(const std::vector<double>& breaks,
                                          Index steps) {
  require(breaks.size() >= 2, "segmented grid: need at least one segment");
  const double span = breaks.back() - breaks.front();
  const double dt = span / static_cast<double>(steps);
  std::vector<double> g;
  g.reserve(static_cast<size_t>(steps) + breaks.size());
  g.push_back(breaks.front());
  for (size_t b = 0; b + 1 < breaks.size(); ++b) {
    const double len = breaks[b + 1] - breaks[b];
    const Index n = std::max<Index>(1, static_cast<Index>(std::ceil(len / dt)));
    for (Index s = 1; s <= n; ++s)
      g.push_back(breaks[b] +
                  len * static_cast<double>(s) / static_cast<double>(n));
  }
  return g;
}

// Step count satisfying dt <= 1/(40 E_max), with E_max sampled along the
// protocol.  The sampling cannot miss the extremes: A, B and the tilt
// envelope are monotone between the handful of protocol breakpoints.
template <class Ham>
Index rule_steps(const Ham& hamiltonian, double t_total) {
  double e_max = 0.0;
  const Index samples = 256;
  for (Index i = 0; i <= samples; ++i) {
    const double t =
        t_total * static_cast<double>(i) / static_cast<double>(samples);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hamiltonian(t),
                                                       Eigen::EigenvaluesOnly);
    e_max = std::max(e_max, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  return std::max<Index>(
      16, static_cast<Index>(std::ceil(40.0 * e_max * t_total)) + 1);
}

// Propagator over [0, t_total]: explicit step counts are used as given on a
// plain uniform grid; the automatic mode aligns steps with the protocol
// breakpoints and refines by step halving until two resolutions agree.
template <class Ham>
Eigen::MatrixXcd quench_propagator(const Ham& hamiltonian,
                                   const DetectorQuench& q) {
  if (q.steps > 0)
    return time_ordered_propagator(hamiltonian,
                                   uniform_grid(q.t_total, q.steps));
  Index n = rule_steps(hamiltonian, q.t_total);
  Eigen::MatrixXcd u = time_ordered_propagator(
      hamiltonian, segmented_grid(hamiltonian.breakpoints(), n));
  for (int round = 0; round < 6; ++round) {
    n *= 2;
    Eigen::MatrixXcd u2 = time_ordered_propagator(
        hamiltonian, segmented_grid(hamiltonian.breakpoints(), n));
    const double diff = (u2 - u).cwiseAbs().maxCoeff();
    u = std::move(u2);
    if (diff <= 1e-9) return u;
  }
  throw numerical_error("quench propagator: step halving did not converge");
}

}  // namespace detail

// Composed single-pair readout channel s_dephasing s_ptrace s_prop s_prep,
// mapping vec(rho_target) to the dephased detector state.
inline Superoperator detection_channel(const AnnealSchedule& schedule,
                                       const DetectorQuench& q) {
  const PairQuenchHamiltonian hamiltonian(schedule, q);
  Superoperator tot = compose_readout(detail::quench_propagator(hamiltonian, q));
  require_accuracy(trace_preservation_error(tot) <= 1e-10,
                   "detection channel: trace preservation lost");
  return tot;
}

inline ReadoutAxis detection_axis(const AnnealSchedule& schedule,
                                  const DetectorQuench& q) {
  return readout_axis(detection_channel(schedule, q));
}

// Joint channel for two coupled targets read simultaneously: 16x16, mapping
// vec(rho_t1t2) to the dephased two-detector state.
inline Superoperator two_target_channel(const AnnealSchedule& schedule,
                                        const DetectorQuench& q,
                                        double coupling_ghz) {
  const TwoPairQuenchHamiltonian hamiltonian(schedule, q, coupling_ghz);
  const Superoperator prop = s_prop(detail::quench_propagator(hamiltonian, q));
  const Superoperator prep = kron_super(s_prep(), s_prep());
  const Superoperator ptr = kron_super(s_ptrace(), s_ptrace());
  Superoperator tot = s_dephasing(2) * ptr * prop * prep;
  require_accuracy(trace_preservation_error(tot) <= 1e-10,
                   "two-target channel: trace preservation lost");
  return tot;
}

struct TwoTargetReadout {
  double coupling = 0.0;  // GHz between the two targets
  Eigen::Vector3d local_axis = Eigen::Vector3d::Zero();
  double theta = 0.0, phi = 0.0;  // direction of local_axis
  double f_local = 0.0;           // separable target-1 block norm
  double f_nonlocal = 0.0;        // full non-identity row norm
};

// Local and non-local readout fidelity for two coupled targets.  Both come
// from the detector-1 Z row of the Pauli transfer matrix: f_local keeps the
// separable target-1 block {XI, YI, ZI}, f_nonlocal keeps every non-identity
// column, counting information that leaked into correlated components but is
// still recovered when both detectors are read together.  By construction
// f_nonlocal >= f_local, with equality when the channel factorizes.
inline TwoTargetReadout two_target_fidelity(const AnnealSchedule& schedule,
                                            const DetectorQuench& q,
                                            double coupling_ghz) {
  const Superoperator tot = two_target_channel(schedule, q, coupling_ghz);
  const Eigen::MatrixXd r = ptm(tot);
  TwoTargetReadout out;
  out.coupling = coupling_ghz;
  const Index zi = 12;  // base-4 label: Z on detector 1, identity on detector 2
  out.local_axis = Eigen::Vector3d(r(zi, 4), r(zi, 8), r(zi, 12));
  out.f_local = out.local_axis.norm();
  double full = 0.0;
  for (Index b = 1; b < 16; ++b) full += r(zi, b) * r(zi, b);
  out.f_nonlocal = std::sqrt(full);
  require_accuracy(out.f_nonlocal <= 1.0 + 1e-6,
                   "two-target readout: fidelity exceeds the physical bound");
  const double planar = std::hypot(out.local_axis.x(), out.local_axis.y());
  if (out.f_local > 1e-12)
    out.theta = std::atan2(planar, out.local_axis.z());
  if (planar > 1e-12)
    out.phi = std::atan2(out.local_axis.y(), out.local_axis.x());
  return out;
}

// Coupling sweep, one readout per point, deterministic under any worker count.
inline std::vector<TwoTargetReadout> two_target_sweep(
    const AnnealSchedule& schedule, const DetectorQuench& q,
    const std::vector<double>& couplings, int workers = 1) {
  require(!couplings.empty(), "two-target sweep: need at least one coupling");
  std::vector<TwoTargetReadout> out(couplings.size());
  parallel_for(static_cast<Index>(couplings.size()), workers, [&](Index i) {
    out[static_cast<size_t>(i)] =
        two_target_fidelity(schedule, q, couplings[static_cast<size_t>(i)]);
  });
  return out;
}

}  // namespace adqc
