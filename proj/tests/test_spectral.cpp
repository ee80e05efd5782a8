#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "adqc/bdg.hpp"
#include "adqc/magnon.hpp"
#include "adqc/rng.hpp"
#include "adqc/spectral.hpp"

#include <cmath>
#include <vector>

using namespace adqc;

namespace {

// Travelling cosine wave sampled on the lattice, the workhorse synthetic
// input: k0 in radians per site, nu0 in GHz.
SpaceTimeField wave(Index l, Index t, double dt, double k0, double nu0,
                    double amp) {
  SpaceTimeField f;
  f.values.resize(l, t);
  for (Index n = 0; n < l; ++n)
    for (Index s = 0; s < t; ++s)
      f.values(n, s) = amp * std::cos(k0 * double(n) - two_pi * nu0 * dt * s);
  f.dt = dt;
  f.basis = FieldBasis::x;
  return f;
}

double second_peak(const Spectrum& spec, Index m0, Index m1, Index j0) {
  double best = 0.0;
  for (Index m = 0; m < spec.momenta(); ++m)
    for (Index j = 0; j < spec.bins(); ++j)
      if (!((m == m0 || m == m1) && j == j0))
        best = std::max(best, spec.magnitude(m, j));
  return best;
}

}  // namespace

TEST_CASE("an on-grid travelling mode isolates into a single bin") {
  const Index l = 8, t = 40;
  const double dt = 0.1;
  const double k0 = two_pi * 3.0 / double(l);
  const double nu0 = 7.0 / (double(t) * dt);
  const Spectrum spec =
      fft2(wave(l, t, dt, k0, nu0, 0.8), SpectralWindow::none, 1);

  // cos(k0 n - w0 t) = two complex exponentials; only one lives in the
  // stored positive-frequency half, so the transform resolves the
  // propagation direction: one peak at (k0, nu0), none at (-k0, nu0).
  const double peak = spec.magnitude(3, 7);
  CHECK(peak == doctest::Approx(0.5 * 0.8 * double(l * t)).epsilon(1e-12));
  CHECK(spec.magnitude(5, 7) < peak / 100.0);
  CHECK(peak / second_peak(spec, 3, 3, 7) > 100.0);
  CHECK(spec.omega_grid[7] == doctest::Approx(nu0).epsilon(1e-12));
  CHECK(spec.k_grid[3] == doctest::Approx(k0).epsilon(1e-12));
}

TEST_CASE("a constant field parks all energy at the origin bin") {
  SpaceTimeField f;
  f.values = Eigen::MatrixXd::Constant(6, 32, 0.6);
  f.dt = 0.2;
  const Spectrum spec = fft2(f, SpectralWindow::none, 1);
  const double peak = spec.magnitude(0, 0);
  CHECK(peak == doctest::Approx(0.6 * 6 * 32).epsilon(1e-12));
  CHECK(second_peak(spec, 0, 0, 0) <= 1e-10 * peak);
}

TEST_CASE("transform satisfies Parseval with the documented weights") {
  Rng rng(41);
  SpaceTimeField f;
  f.values.resize(6, 50);
  for (Index i = 0; i < f.values.size(); ++i)
    f.values.data()[i] = rng.uniform(-1.0, 1.0);
  f.dt = 0.1;

  struct Setup {
    SpectralWindow window;
    Index pad;
    Index t;  // truncate to cover the odd transform-length path too
  };
  for (const Setup& s : {Setup{SpectralWindow::hann, 4, 50},
                         Setup{SpectralWindow::none, 1, 50},
                         Setup{SpectralWindow::none, 1, 25}}) {
    SpaceTimeField g;
    g.values = f.values.leftCols(s.t);
    g.dt = f.dt;
    const Spectrum spec = fft2(g, s.window, s.pad);
    const Index n = s.pad * s.t;

    Eigen::VectorXd w = Eigen::VectorXd::Ones(s.t);
    if (s.window == SpectralWindow::hann)
      for (Index i = 0; i < s.t; ++i)
        w[i] = 0.5 * (1.0 - std::cos(two_pi * double(i) / double(s.t)));
    const double field_energy =
        (g.values.array().rowwise() * w.transpose().array()).square().sum();

    double spec_energy = 0.0;
    for (Index j = 0; j < spec.bins(); ++j) {
      const double weight = (j == 0 || 2 * j == n) ? 1.0 : 2.0;
      spec_energy += weight * spec.magnitude.col(j).squaredNorm();
    }
    CHECK(spec_energy == doctest::Approx(double(g.sites()) * double(n) *
                                         field_energy)
                             .epsilon(1e-6));
  }
}

TEST_CASE("transform is additive in its inputs and homogeneous in scale") {
  const SpaceTimeField a = wave(10, 30, 0.1, two_pi * 2.0 / 10.0, 1.1, 0.3);
  const SpaceTimeField b = wave(10, 30, 0.1, two_pi * 7.0 / 10.0, 2.3, 0.4);
  SpaceTimeField sum = a;
  sum.values += b.values;
  SpaceTimeField scaled = a;
  scaled.values *= 3.0;

  const Spectrum sa = fft2(a), sb = fft2(b), ss = fft2(sum),
                 sc = fft2(scaled);
  CHECK((ss.amplitude - sa.amplitude - sb.amplitude).cwiseAbs().maxCoeff() <=
        1e-9 * sa.magnitude.maxCoeff());
  CHECK((sc.magnitude - 3.0 * sa.magnitude).cwiseAbs().maxCoeff() <=
        1e-12 * sc.magnitude.maxCoeff());
}

TEST_CASE("mirror-even fields produce mirror-symmetric spectra") {
  const MagnonModel m(2.0, -0.60, 12);
  const Spectrum spec = fft2(magnon_x_field(m, 0.1, 80));
  const double scale = spec.magnitude.maxCoeff();
  for (Index k = 1; k < 12; ++k)
    CHECK((spec.magnitude.row(k) - spec.magnitude.row(12 - k))
              .cwiseAbs()
              .maxCoeff() <= 1e-9 * scale);
}

TEST_CASE("windowing shifts a synthetic peak by less than half a bin") {
  const Index l = 6, t = 64;
  const double dt = 0.125;
  const double res = 1.0 / (double(t) * dt);
  const double nu0 = 7.43 * res;  // deliberately off-grid
  const double k0 = two_pi * 2.0 / double(l);
  const SpaceTimeField f = wave(l, t, dt, k0, nu0, 0.9);

  const RidgePoint with = extract_ridge(fft2(f, SpectralWindow::hann), 2);
  const RidgePoint without = extract_ridge(fft2(f, SpectralWindow::none), 2);
  CHECK(std::abs(with.omega - without.omega) < 0.5 * res);
  CHECK(std::abs(with.omega - nu0) < 0.2 * res);
  CHECK(std::abs(without.omega - nu0) < 0.2 * res);
  CHECK_FALSE(with.low_contrast);
  CHECK(with.contrast > 1.5);
}

TEST_CASE("flat and empty columns are flagged instead of inventing a ridge") {
  // A time impulse transforms to an exactly flat column at every momentum.
  SpaceTimeField pulse;
  pulse.values = Eigen::MatrixXd::Zero(6, 32);
  pulse.values.col(0).setConstant(0.7);
  pulse.dt = 0.1;
  const RidgePoint flat =
      extract_ridge(fft2(pulse, SpectralWindow::none, 1), 0);
  CHECK(flat.low_contrast);
  CHECK(flat.contrast == doctest::Approx(1.0).epsilon(1e-12));

  // A constant field leaves k != 0 columns with nothing but roundoff.
  SpaceTimeField still;
  still.values = Eigen::MatrixXd::Constant(6, 32, 0.5);
  still.dt = 0.1;
  const Spectrum spec = fft2(still, SpectralWindow::none, 1);
  const RidgePoint empty = extract_ridge(spec, 2);
  CHECK(empty.low_contrast);
  CHECK(empty.contrast == 0.0);

  // Read as a z-basis density the k = 0 column holds only static weight,
  // which the exclusion band removes.
  still.basis = FieldBasis::z;
  const RidgePoint dc = extract_ridge(fft2(still, SpectralWindow::none, 1), 0);
  CHECK(dc.low_contrast);

  CHECK_THROWS_AS(extract_ridge(spec, 17), std::invalid_argument);
}

TEST_CASE("z-basis ridge extraction skips the static band") {
  const Index l = 8, t = 50;
  const double dt = 0.1;
  const double k0 = two_pi * 2.0 / double(l);
  const double nu0 = 11.0 / (double(t) * dt);
  SpaceTimeField f = wave(l, t, dt, k0, nu0, 0.1);
  // Static structure sharing the mode's momentum, much stronger than the
  // travelling part: an argmax without the exclusion would lock onto it.
  for (Index n = 0; n < l; ++n)
    for (Index s = 0; s < t; ++s)
      f.values(n, s) += 0.5 + 0.25 * std::cos(k0 * double(n));

  f.basis = FieldBasis::x;
  CHECK(extract_ridge(fft2(f, SpectralWindow::none, 1), 2).omega == 0.0);
  f.basis = FieldBasis::z;
  const RidgePoint r = extract_ridge(fft2(f, SpectralWindow::none, 1), 2);
  CHECK(r.omega == doctest::Approx(nu0).epsilon(1e-9));
  CHECK_FALSE(r.low_contrast);
}

TEST_CASE("magnon pipelines land on their closed-form dispersions") {
  const Index L = 56;
  const MagnonModel m(2.0, -0.60, L);

  const Spectrum sx = fft2(magnon_x_field(m, 0.1, 200));
  for (Index k = 0; k < L; ++k) {
    const RidgePoint r = extract_ridge(sx, k);
    CHECK_FALSE(r.low_contrast);
    CHECK(std::abs(r.omega - e_eff(m, sx.k_grid[k])) <=
          0.05 * sx.omega_resolution);
  }

  // Density ridges sit on the band-edge curve 2|J| sin(k/2).  k = 0 is
  // excluded: its model frequency lies inside the static band the z-basis
  // search skips, so no meaningful comparison exists there.
  const Spectrum sz = fft2(magnon_density_field(m, 0.1, 200));
  for (Index k = 1; k < L; ++k) {
    const RidgePoint r = extract_ridge(sz, k);
    CHECK_FALSE(r.low_contrast);
    CHECK(std::abs(r.omega - 1.2 * std::abs(std::sin(0.5 * sz.k_grid[k]))) <=
          (1.0 + 1e-9) * sz.omega_resolution);
  }
}

TEST_CASE("fermion x-basis pipeline reproduces the transverse-field band") {
  const Index L = 56;
  const BdGSystem sys = BdGSystem::uniform(L, 2.0, -0.60);
  const Spectrum spec = fft2(x_basis_field(sys, 0.1, 200));

  Eigen::VectorXd ridge(L), model(L);
  for (Index k = 0; k < L; ++k) {
    const RidgePoint r = extract_ridge(spec, k);
    CHECK_FALSE(r.low_contrast);
    ridge[k] = r.omega;
    model[k] = dispersion_exact(2.0, -0.60, spec.k_grid[k]);
  }
  const DispersionDeviation dev =
      compare_dispersion(ridge, model, spec.omega_resolution);
  CHECK(dev.max_bins <= 1.0);
  CHECK(dev.rms_bins <= dev.max_bins);
}

TEST_CASE("dispersion comparison counts in pre-padding bins") {
  Eigen::VectorXd a(4), b(4);
  a << 1.0, 1.2, 1.4, 1.6;
  b = a;
  const DispersionDeviation same = compare_dispersion(a, b, 0.05);
  CHECK(same.max_bins == 0.0);
  CHECK(same.rms_bins == 0.0);

  b.array() += 0.05;  // exactly one bin
  const DispersionDeviation off = compare_dispersion(a, b, 0.05);
  CHECK(off.max_bins == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(off.rms_bins == doctest::Approx(1.0).epsilon(1e-12));

  Eigen::VectorXd c(3);
  c << 1.0, 1.2, 1.4;
  CHECK_THROWS_AS(compare_dispersion(a, c, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(compare_dispersion(a, b, 0.0), std::invalid_argument);
}

TEST_CASE("explicit time grids must be uniform") {
  const SpaceTimeField f = wave(6, 20, 0.1, two_pi / 6.0, 1.0, 0.5);
  std::vector<double> grid(20);
  for (Index s = 0; s < 20; ++s) grid[size_t(s)] = 0.1 * double(s);

  const Spectrum a = fft2(f);
  const Spectrum b = fft2(f.values, grid, FieldBasis::x);
  CHECK((a.magnitude - b.magnitude).cwiseAbs().maxCoeff() == 0.0);

  grid[7] += 1e-4;
  CHECK_THROWS_AS(fft2(f.values, grid, FieldBasis::x), std::invalid_argument);
  CHECK_THROWS_AS(fft2(f.values, {0.0, 0.1}, FieldBasis::x),
                  std::invalid_argument);
  CHECK_THROWS_AS(fft2(f, SpectralWindow::hann, 0), std::invalid_argument);
}
