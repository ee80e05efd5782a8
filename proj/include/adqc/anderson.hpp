#pragma once

// Staggered-imbalance diagnostics for disordered chains: disorder ensembles
// over site energies, the even/odd imbalance observable, and the small-W
// power-law fit of the late-time imbalance.

#include "adqc/bdg.hpp"
#include "adqc/common.hpp"
#include "adqc/rng.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace adqc {

// Sites 1, 3, 5, ... carry the initial excitations of the staggered state,
// so I(0) = +1 by construction.
inline std::vector<Index> staggered_sites(Index length) {
  require(length >= 2 && length % 2 == 0,
          "imbalance: length must be even and >= 2");
  std::vector<Index> odd;
  odd.reserve(static_cast<size_t>(length / 2));
  for (Index i = 1; i < length; i += 2) odd.push_back(i);
  return odd;
}

struct ImbalanceSeries {
  std::vector<double> t_grid;
  Eigen::VectorXd value;  // I(t) = (p_odd - p_even) / (p_odd + p_even)
  double disorder_w = 0.0;  // ensemble metadata, carried into output tables
  std::uint64_t seed = 0;

  // Mean of I over grid points with t in [t_lo, t_hi].
  double late_average(double t_lo, double t_hi) const {
    require(t_lo <= t_hi, "imbalance: empty averaging window");
    double sum = 0.0;
    Index hits = 0;
    for (size_t i = 0; i < t_grid.size(); ++i)
      if (t_grid[i] >= t_lo && t_grid[i] <= t_hi) {
        sum += value[static_cast<Index>(i)];
        ++hits;
      }
    require(hits > 0, "imbalance: no grid points in averaging window");
    return sum / static_cast<double>(hits);
  }
};

// Imbalance of the excitation populations between odd and even sites, from a
// tau^x series (sites x times).  p_odd/p_even are the summed excitation
// probabilities (1 - tau^x_i)/2 over odd/even sites.
inline ImbalanceSeries imbalance(const Eigen::MatrixXd& tau_x_series,
                                 const std::vector<double>& t_grid) {
  const Index n = tau_x_series.rows();
  require(n >= 2 && n % 2 == 0, "imbalance: site count must be even and >= 2");
  require(static_cast<size_t>(tau_x_series.cols()) == t_grid.size(),
          "imbalance: grid length must match series columns");
  ImbalanceSeries out;
  out.t_grid = t_grid;
  out.value.resize(tau_x_series.cols());
  for (Index c = 0; c < tau_x_series.cols(); ++c) {
    double p_odd = 0.0, p_even = 0.0;
    for (Index i = 0; i < n; ++i)
      ((i % 2 == 1) ? p_odd : p_even) += 0.5 * (1.0 - tau_x_series(i, c));
    const double tot = p_odd + p_even;
    require_domain(tot >= 1e-12,
                   "imbalance: total excitation weight vanishes, I undefined");
    out.value[c] = (p_odd - p_even) / tot;
  }
  return out;
}

// Disorder realizations: site energies shifted by independent uniform draws
// from [-J W / 2, +J W / 2], with J the largest coupling magnitude of the
// base chain.  W = 0 returns `count` copies of the base chain.  Realization
// r uses the child stream r of `seed`, so ensembles are reproducible and
// order-independent.
inline std::vector<BdGSystem> disorder_ensemble(const BdGSystem& base,
                                                double w, Index count,
                                                std::uint64_t seed) {
  base.validate();
  require(w >= 0.0 && std::isfinite(w), "disorder: W must be >= 0");
  require(count >= 1, "disorder: need at least one realization");
  const double j_scale = base.bond_coupling.cwiseAbs().maxCoeff();
  require(w == 0.0 || j_scale > 0.0,
          "disorder: coupling scale vanishes, W is meaningless");
  const double half_width = 0.5 * j_scale * w;
  const Rng root(seed);
  std::vector<BdGSystem> out(static_cast<size_t>(count), base);
  for (Index r = 0; r < count; ++r) {
    Rng rng = root.stream(static_cast<std::uint64_t>(r));
    for (Index i = 0; i < base.length(); ++i)
      out[static_cast<size_t>(r)].site_energy[i] +=
          rng.uniform(-half_width, half_width);
  }
  return out;
}

struct ScalingFit {
  double coefficient = 0.0;  // c in I ~ c W^p
  double exponent = 0.0;     // p
  double coefficient_err = 0.0;
  double exponent_err = 0.0;
  std::vector<Index> used;     // indices that entered the fit
  std::vector<Index> dropped;  // indices excluded for non-positive imbalance
};

// Log-log least squares of late-time imbalance against disorder strength,
// ln I = ln c + p ln W.  Points with non-positive imbalance cannot enter the
// log fit and are reported in `dropped`.  Callers pass the small-W subset:
// every W must lie in (0, 2] and at least four points must survive.
inline ScalingFit fit_quadratic_scaling(const std::vector<double>& w_values,
                                        const std::vector<double>& imbalances) {
  require(w_values.size() == imbalances.size(),
          "scaling fit: value count mismatch");
  ScalingFit fit;
  std::vector<double> x, y;
  for (size_t i = 0; i < w_values.size(); ++i) {
    require(w_values[i] > 0.0 && w_values[i] <= 2.0,
            "scaling fit: W values must lie in (0, 2]");
    if (imbalances[i] > 0.0) {
      x.push_back(std::log(w_values[i]));
      y.push_back(std::log(imbalances[i]));
      fit.used.push_back(static_cast<Index>(i));
    } else {
      fit.dropped.push_back(static_cast<Index>(i));
    }
  }
  const size_t n = x.size();
  require(n >= 4, "scaling fit: need at least four usable points");

  double xm = 0.0, ym = 0.0;
  for (size_t i = 0; i < n; ++i) {
    xm += x[i];
    ym += y[i];
  }
  xm /= static_cast<double>(n);
  ym /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
  }
  require(sxx > 0.0, "scaling fit: W values are degenerate");
  const double slope = sxy / sxx;
  const double icept = ym - slope * xm;

  double ssr = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double resid = y[i] - (icept + slope * x[i]);
    ssr += resid * resid;
  }
  // Residual variance with two fitted parameters; zero residuals (exact
  // power law) give zero standard errors.
  const double s2 =
      n > 2 ? ssr / static_cast<double>(n - 2) : 0.0;
  fit.exponent = slope;
  fit.coefficient = std::exp(icept);
  fit.exponent_err = std::sqrt(s2 / sxx);
  const double icept_var = s2 * (1.0 / static_cast<double>(n) + xm * xm / sxx);
  fit.coefficient_err = fit.coefficient * std::sqrt(icept_var);
  return fit;
}

}  // namespace adqc
