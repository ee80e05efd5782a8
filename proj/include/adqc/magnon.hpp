#pragma once

// First-order single-excitation ("magnon") analytics for the uniform
// periodic chain: the effective band E(k) = delta + coupling * cos k, the
// x-basis magnetization profile it implies, the excitation density, and
// the loci of the corresponding Fourier peaks.

#include <utility>

#include "adqc/common.hpp"
#include "adqc/spacetime.hpp"

namespace adqc {

// Uniform ring in the weak-coupling regime.  The closed forms live in the
// single-excitation sector, so they are meaningful only while the splitting
// dominates the coupling; construction rejects |coupling| >= delta and the
// weak_coupling flag marks the quantitatively reliable band (ratio <= 0.3).
struct MagnonModel {
  double delta = 0.0;     // GHz
  double coupling = 0.0;  // GHz
  Index length = 0;       // even site count; the chain is always periodic
  bool weak_coupling = false;

  MagnonModel(double delta_ghz, double coupling_ghz, Index sites)
      : delta(delta_ghz), coupling(coupling_ghz), length(sites) {
    require(length >= 2 && length % 2 == 0,
            "magnon: length must be a positive even number");
    require(delta > 0.0, "magnon: delta must be positive");
    require(std::abs(coupling) < delta,
            "magnon: model needs |coupling| < delta");
    weak_coupling = std::abs(coupling) / delta <= 0.3;
  }
};

// Single-excitation band, first order in coupling/delta.
inline double e_eff(const MagnonModel& model, double k) {
  return model.delta + model.coupling * std::cos(k);
}

// <sigma^x_n>(t) after preparing (1 + sigma^x_0)|0...0>/sqrt(2): every
// discrete momentum contributes a cosine at its band energy.  Periodic in
// n with period L, so any integer site index is accepted.
inline double m_x_profile(const MagnonModel& model, Index n, double t) {
  const Index l = model.length;
  double sum = 0.0;
  for (Index m = 0; m < l; ++m) {
    const double k = two_pi * double(m) / double(l);
    sum += std::cos(two_pi * e_eff(model, k) * t + k * double(n));
  }
  return sum / double(l);
}

// Probability of finding the excitation at site n after it starts at site 0,
// rho = |eta|^2 with eta the free single-particle propagator on the band.
inline double excitation_density(const MagnonModel& model, Index n, double t) {
  const Index l = model.length;
  cplx eta = 0.0;
  for (Index m = 0; m < l; ++m) {
    const double q = two_pi * double(m) / double(l);
    eta += std::exp(ci * (q * double(n) - two_pi * e_eff(model, q) * t));
  }
  eta /= double(l);
  return std::norm(eta);
}

// Fourier peak loci: the x-basis field rings at the band energy itself,
// the z-basis density at the band's difference frequencies, which collapse
// onto +-2 J sin(k/2) on the uniform ring.
inline std::pair<double, double> omega_peak_x(const MagnonModel& model,
                                              double k) {
  const double e = e_eff(model, k);
  return {e, -e};
}

inline std::pair<double, double> omega_peak_z(const MagnonModel& model,
                                              double k) {
  const double w = 2.0 * model.coupling * std::sin(0.5 * k);
  return {w, -w};
}

// Space-time records on a uniform time grid t_j = j * dt, ready for the
// Fourier pipeline.
inline SpaceTimeField magnon_x_field(const MagnonModel& model, double dt,
                                     Index steps) {
  require(dt > 0.0 && steps >= 2, "magnon: field needs dt > 0 and >= 2 steps");
  SpaceTimeField field;
  field.dt = dt;
  field.basis = FieldBasis::x;
  field.values.resize(model.length, steps);
  for (Index j = 0; j < steps; ++j)
    for (Index n = 0; n < model.length; ++n)
      field.values(n, j) = m_x_profile(model, n, dt * double(j));
  return field;
}

inline SpaceTimeField magnon_density_field(const MagnonModel& model, double dt,
                                           Index steps) {
  require(dt > 0.0 && steps >= 2, "magnon: field needs dt > 0 and >= 2 steps");
  SpaceTimeField field;
  field.dt = dt;
  field.basis = FieldBasis::z;
  field.values.resize(model.length, steps);
  for (Index j = 0; j < steps; ++j)
    for (Index n = 0; n < model.length; ++n)
      field.values(n, j) = excitation_density(model, n, dt * double(j));
  return field;
}

}  // namespace adqc
