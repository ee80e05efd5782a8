#pragma once

// 2D Fourier analysis of space-time magnetization fields: discrete
// transform with the e^{i(k n - 2 pi nu t)} sign convention, per-momentum
// ridge extraction with sub-bin refinement, and comparison against analytic
// dispersion curves in bin units.
//
// Grids are at most a few hundred points on either axis, so the transform
// is two dense kernel products rather than an FFT; the O(L T^2) cost is
// microseconds at experiment scale and keeps the convention explicit.

#include "adqc/common.hpp"
#include "adqc/spacetime.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace adqc {

enum class SpectralWindow { none, hann };

// Transform of an L x T field.  Frequencies are cycles per ns (GHz),
// matching the e^{-i 2 pi E t} evolution convention, so a mode of energy E
// peaks in the bin nearest omega = E.  Real input makes the negative-
// frequency half redundant; only omega >= 0 is stored.
//
// Zero padding refines the omega grid without adding information: the
// honest resolution stays 1 / (T dt), kept in omega_resolution, and every
// "within one bin" statement downstream is measured in that unit.
//
// Parseval bookkeeping (unnormalized kernels): summing magnitude^2 with
// weight 2 on bins strictly between DC and Nyquist and weight 1 on those
// two equals L * n_padded * sum of the windowed field squared.
struct Spectrum {
  Eigen::VectorXd k_grid;      // radians per site, 2 pi m / L
  Eigen::VectorXd omega_grid;  // GHz, 0 .. Nyquist inclusive
  Eigen::MatrixXcd amplitude;  // L x bins unnormalized DFT coefficients
  Eigen::MatrixXd magnitude;   // |amplitude|
  FieldBasis basis = FieldBasis::x;
  double omega_resolution = 0.0;  // GHz, 1 / (T dt) before padding

  Index momenta() const { return magnitude.rows(); }
  Index bins() const { return magnitude.cols(); }
};

inline Spectrum fft2(const SpaceTimeField& field,
                     SpectralWindow window = SpectralWindow::hann,
                     Index pad_factor = 4) {
  field.validate();
  require(pad_factor >= 1, "fft2: pad factor must be >= 1");
  const Index l = field.sites();
  const Index t = field.steps();
  const Index n = pad_factor * t;
  const Index bins = n / 2 + 1;

  // Periodic Hann, the DFT-natural form: an on-grid mode spreads into
  // exactly three coefficients with 2:1 amplitude ratio.
  Eigen::VectorXd w = Eigen::VectorXd::Ones(t);
  if (window == SpectralWindow::hann)
    for (Index s = 0; s < t; ++s)
      w[s] = 0.5 * (1.0 - std::cos(two_pi * double(s) / double(t)));
  const Eigen::MatrixXd wf =
      (field.values.array().rowwise() * w.transpose().array()).matrix();

  // Time kernel e^{-2 pi i j s / n}; the zero padding only shortens the sum.
  Eigen::MatrixXcd et(t, bins);
  for (Index s = 0; s < t; ++s)
    for (Index j = 0; j < bins; ++j) {
      const double th = two_pi * double(j) * double(s) / double(n);
      et(s, j) = cplx(std::cos(th), -std::sin(th));
    }
  // Space kernel e^{+i k_m site}.
  Eigen::MatrixXcd ek(l, l);
  for (Index m = 0; m < l; ++m)
    for (Index site = 0; site < l; ++site) {
      const double th = two_pi * double(m) * double(site) / double(l);
      ek(m, site) = cplx(std::cos(th), std::sin(th));
    }

  Spectrum spec;
  spec.amplitude = ek * (wf.cast<cplx>() * et);
  spec.magnitude = spec.amplitude.cwiseAbs();
  spec.k_grid = momentum_grid(l);
  spec.omega_grid.resize(bins);
  for (Index j = 0; j < bins; ++j)
    spec.omega_grid[j] = double(j) / (double(n) * field.dt);
  spec.basis = field.basis;
  spec.omega_resolution = 1.0 / (double(t) * field.dt);
  return spec;
}

// Entry point for externally sampled data, where the time grid arrives as
// an explicit list and uniformity has to be checked rather than assumed.
inline Spectrum fft2(const Eigen::MatrixXd& values,
                     const std::vector<double>& t_grid, FieldBasis basis,
                     SpectralWindow window = SpectralWindow::hann,
                     Index pad_factor = 4) {
  require(static_cast<size_t>(values.cols()) == t_grid.size(),
          "fft2: need one time per column");
  require(t_grid.size() >= 2, "fft2: need at least two samples");
  const double dt = t_grid[1] - t_grid[0];
  require(dt > 0.0 && std::isfinite(dt), "fft2: time grid must increase");
  for (size_t s = 1; s < t_grid.size(); ++s)
    require(std::abs(t_grid[s] - t_grid[s - 1] - dt) <= 1e-9,
            "fft2: time grid must be uniform");
  SpaceTimeField f;
  f.values = values;
  f.dt = dt;
  f.basis = basis;
  return fft2(f, window, pad_factor);
}

struct RidgePoint {
  double omega = 0.0;         // GHz, parabola-refined peak position
  double contrast = 0.0;      // column max over column mean
  bool low_contrast = false;  // contrast < 1.5: position unreliable
};

// Peak frequency of one momentum column.  For z-basis fields the static
// background (conserved densities, quench offsets) owns the low end of the
// column, so every bin below one pre-padding resolution unit is skipped;
// padding spreads that DC weight across its neighbors, hence the band
// rather than the single j = 0 bin.
inline RidgePoint extract_ridge(const Spectrum& spec, Index k_index) {
  require(spec.magnitude.size() > 0, "ridge: empty spectrum");
  require(k_index >= 0 && k_index < spec.momenta(),
          "ridge: momentum index out of range");
  Index first = 0;
  if (spec.basis == FieldBasis::z)
    while (first < spec.bins() &&
           spec.omega_grid[first] < spec.omega_resolution)
      ++first;
  require(first < spec.bins(), "ridge: no bins above the excluded band");

  Index peak = first;
  double best = -1.0, sum = 0.0;
  for (Index j = first; j < spec.bins(); ++j) {
    const double v = spec.magnitude(k_index, j);
    sum += v;
    if (v > best) {
      best = v;
      peak = j;
    }
  }
  const double mean = sum / double(spec.bins() - first);

  RidgePoint out;
  // Columns carrying nothing but roundoff can show a large max/mean ratio;
  // the absolute floor keeps them flagged alongside genuinely flat ones.
  const double floor = 1e-12 * spec.magnitude.maxCoeff();
  out.contrast = (mean > 0.0 && best > floor) ? best / mean : 0.0;
  out.low_contrast = !(out.contrast >= 1.5);
  // The k = 0 column of a density field is the conserved total occupation:
  // whatever survives the excluded band is window leakage of its static
  // weight, not a ridge, so the position is always marked unreliable.
  if (spec.basis == FieldBasis::z && k_index == 0) out.low_contrast = true;
  out.omega = spec.omega_grid[peak];
  if (peak > first && peak + 1 < spec.bins()) {
    const double ym = spec.magnitude(k_index, peak - 1);
    const double yp = spec.magnitude(k_index, peak + 1);
    const double denom = ym - 2.0 * best + yp;
    if (denom < 0.0) {
      const double shift = std::clamp(0.5 * (ym - yp) / denom, -0.5, 0.5);
      out.omega += shift * (spec.omega_grid[1] - spec.omega_grid[0]);
    }
  }
  return out;
}

struct DispersionDeviation {
  double max_bins = 0.0;
  double rms_bins = 0.0;
};

// Pointwise deviation between a measured ridge and a model curve sharing
// its k grid, in units of the pre-padding frequency bin.
inline DispersionDeviation compare_dispersion(const Eigen::VectorXd& ridge,
                                              const Eigen::VectorXd& model,
                                              double omega_resolution) {
  require(ridge.size() == model.size(),
          "dispersion compare: curves must share the k grid");
  require(ridge.size() > 0, "dispersion compare: empty curves");
  require(omega_resolution > 0.0 && std::isfinite(omega_resolution),
          "dispersion compare: bin width must be positive");
  DispersionDeviation dev;
  double ss = 0.0;
  for (Index i = 0; i < ridge.size(); ++i) {
    const double d = std::abs(ridge[i] - model[i]) / omega_resolution;
    dev.max_bins = std::max(dev.max_bins, d);
    ss += d * d;
  }
  dev.rms_bins = std::sqrt(ss / double(ridge.size()));
  return dev;
}

}  // namespace adqc
