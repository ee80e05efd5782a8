#pragma once

// Damped least-squares extraction of physical parameters from simulated
// magnetization traces: source/detector Bloch angles, precession frequency
// and decay times from the tilted-axis closed form, and (T1, Tphi, J) from
// the two-qubit exchange oscillation.

#include "adqc/bloch.hpp"
#include "adqc/exchange.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace adqc {

struct FitResult {
  std::vector<std::string> names;  // free parameters, canonical order
  std::vector<std::string> units;  // aligned with names
  Eigen::VectorXd estimate;
  Eigen::VectorXd std_error;  // 1-sigma, Gauss-Newton curvature estimate
  double rss = 0.0;
  bool converged = false;
  int iterations = 0;  // trial steps across all starts and stages

  double value(const std::string& name) const {
    return estimate[index_of(name)];
  }
  double error(const std::string& name) const {
    return std_error[index_of(name)];
  }

 private:
  Index index_of(const std::string& name) const {
    for (size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return Index(i);
    throw std::invalid_argument("fit result: no parameter named '" + name +
                                "'");
  }
};

struct FitOptions {
  // Points outside [window_min, window_max] are dropped before fitting; the
  // early-time exclusion keeps preparation/readout overlap out of the fit.
  double window_min = 5.0;   // ns
  double window_max = 28.0;  // ns
  double lambda0 = 1e-3;     // initial damping
  int max_iterations = 200;  // trial-step budget per start
  double rss_tol = 1e-12;    // relative objective decrease to declare done
  double step_tol = 1e-12;   // relative step size to declare done
  bool multistart = true;    // angle-grid starts when an axis is free
  bool numeric_jacobian = false;  // force the finite-difference path

  void validate() const {
    require(window_max > window_min, "fit: empty time window");
    require(lambda0 > 0.0, "fit: damping must be positive");
    require(max_iterations > 0, "fit: iteration budget must be positive");
  }
};

namespace detail {

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

// Central-difference Jacobian, the fallback when no analytic form is wired.
inline Eigen::MatrixXd numeric_jacobian(const ResidualFn& residual,
                                        const Eigen::VectorXd& x) {
  const Index p = x.size();
  const Index n = residual(x).size();
  Eigen::MatrixXd jac(n, p);
  for (Index j = 0; j < p; ++j) {
    const double h = 6e-6 * std::max(1.0, std::abs(x[j]));
    Eigen::VectorXd lo = x, hi = x;
    lo[j] -= h;
    hi[j] += h;
    jac.col(j) = (residual(hi) - residual(lo)) / (2.0 * h);
  }
  return jac;
}

struct LmOutcome {
  Eigen::VectorXd x;
  double rss = 0.0;
  Eigen::MatrixXd jtj;  // curvature at the final point, for standard errors
  int iterations = 0;
  bool converged = false;
  std::vector<double> rss_trace;  // objective after each accepted step
};

// Damped Gauss-Newton iteration: the step solves (J^T J + lambda diag) d =
// -J^T r, with the damping multiplied by 10 on a rejected step and divided
// by 10 on an accepted one.  A step is accepted only if it does not increase
// the objective.  `names` is used for diagnostics only.
inline LmOutcome levenberg(const ResidualFn& residual,
                           const JacobianFn& jacobian, Eigen::VectorXd x,
                           const FitOptions& opt,
                           const std::vector<std::string>& names) {
  auto jac_at = [&](const Eigen::VectorXd& at) {
    return jacobian ? jacobian(at) : numeric_jacobian(residual, at);
  };

  LmOutcome out;
  Eigen::VectorXd r = residual(x);
  double rss = r.squaredNorm();
  out.rss_trace.push_back(rss);
  double lambda = opt.lambda0;
  Eigen::MatrixXd jac = jac_at(x);

  while (out.iterations < opt.max_iterations) {
    for (Index j = 0; j < jac.cols(); ++j)
      if (jac.col(j).norm() <= 1e-12 * std::sqrt(double(jac.rows())))
        throw numerical_error(
            "fit: parameter '" + names[size_t(j)] +
            "' is unconstrained by the data (singular Jacobian)");

    const Eigen::VectorXd grad = jac.transpose() * r;
    if (grad.cwiseAbs().maxCoeff() <= 1e-13 * (1.0 + rss)) {
      out.converged = true;
      break;
    }
    const Eigen::MatrixXd hess = jac.transpose() * jac;

    bool accepted = false;
    while (out.iterations < opt.max_iterations) {
      Eigen::MatrixXd damped = hess;
      damped.diagonal() += lambda * hess.diagonal();
      const Eigen::VectorXd step = damped.ldlt().solve(-grad);
      ++out.iterations;
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd x_try = x + step;
      const Eigen::VectorXd r_try = residual(x_try);
      const double rss_try = r_try.squaredNorm();
      if (rss_try <= rss) {
        const double gain = rss - rss_try;
        const bool small_step =
            step.cwiseAbs().maxCoeff() <=
            opt.step_tol * (1.0 + x.cwiseAbs().maxCoeff());
        x = x_try;
        r = r_try;
        rss = rss_try;
        out.rss_trace.push_back(rss);
        lambda = std::max(lambda / 10.0, 1e-14);
        if (gain <= opt.rss_tol * std::max(rss, 1e-300) || small_step)
          out.converged = true;
        accepted = true;
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e12) {
        // no downhill direction left at this damping; treat a vanishing
        // gradient as convergence, anything else as a stall
        out.converged = grad.cwiseAbs().maxCoeff() <= 1e-6 * (1.0 + rss);
        break;
      }
    }
    if (out.converged || !accepted) break;
    jac = jac_at(x);
  }

  out.x = x;
  out.rss = rss;
  jac = jac_at(x);
  out.jtj = jac.transpose() * jac;
  return out;
}

// sigma_i = sqrt(rss / dof * (J^T J)^-1_ii), the usual curvature estimate.
inline Eigen::VectorXd standard_errors(const LmOutcome& fit, Index n_points) {
  const Index p = fit.x.size();
  const double dof = double(std::max(Index(1), n_points - p));
  const Eigen::MatrixXd cov =
      (fit.rss / dof) *
      fit.jtj.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  return cov.diagonal().cwiseMax(0.0).cwiseSqrt();
}

// Keeps points with window_min <= t <= window_max, preserving order.
inline std::vector<Index> window_indices(const Eigen::VectorXd& t,
                                         const FitOptions& opt) {
  std::vector<Index> keep;
  for (Index i = 0; i < t.size(); ++i)
    if (t[i] >= opt.window_min - 1e-12 && t[i] <= opt.window_max + 1e-12)
      keep.push_back(i);
  return keep;
}

}  // namespace detail

// Wraps into (-pi, pi].
inline double wrap_angle(double a) {
  const double w = std::remainder(a, two_pi);
  return w <= -pi ? w + two_pi : w;
}

// Full parameter set of the tilted-axis magnetization model.  In a fit the
// fixed entries hold their given values and the free entries are starting
// guesses.
struct LarmorParams {
  double delta = 1.4;  // GHz
  double t1 = 30.0;    // ns
  double t2 = 20.0;    // ns, transverse decay entering the closed form
  double theta_s = 0.5 * pi;
  double phi_s = 0.0;
  double theta_d = 0.5 * pi;
  double phi_d = 0.0;
};

namespace detail {

inline constexpr std::array<const char*, 7> kLarmorNames = {
    "delta", "t1", "t2", "theta_s", "phi_s", "theta_d", "phi_d"};
inline constexpr std::array<const char*, 7> kLarmorUnits = {
    "GHz", "ns", "ns", "rad", "rad", "rad", "rad"};

// Model value and gradient with respect to all seven natural parameters.
// Same closed form as larmor_magnetization, written against (T1, T2)
// directly so unphysical iterates (T2 > 2 T1) stay evaluable.
inline double larmor_eval(const LarmorParams& p, double t,
                          std::array<double, 7>* grad) {
  const double e1 = std::exp(-t / p.t1);
  const double e2 = std::exp(-t / p.t2);
  const double psi = two_pi * p.delta * t + p.phi_s - p.phi_d;
  const double cd = std::cos(p.theta_d), sd = std::sin(p.theta_d);
  const double cs = std::cos(p.theta_s), ss = std::sin(p.theta_s);
  const double longitudinal = 1.0 - e1 * (1.0 - cs);
  const double envelope = ss * std::cos(psi) * e2;
  if (grad) {
    const double swing = sd * ss * std::sin(psi) * e2;
    (*grad)[0] = -swing * two_pi * t;                        // delta
    (*grad)[1] = -cd * (1.0 - cs) * e1 * t / (p.t1 * p.t1);  // t1
    (*grad)[2] = sd * envelope * t / (p.t2 * p.t2);          // t2
    (*grad)[3] = -cd * e1 * ss + sd * cs * std::cos(psi) * e2;  // theta_s
    (*grad)[4] = -swing;                                        // phi_s
    (*grad)[5] = -sd * longitudinal + cd * envelope;            // theta_d
    (*grad)[6] = swing;                                         // phi_d
  }
  return cd * longitudinal + sd * envelope;
}

}  // namespace detail

// Fits the tilted-axis magnetization model to (t, m) samples.  `free_names`
// selects which of {delta, t1, t2, theta_s, phi_s, theta_d, phi_d} vary;
// everything else is pinned at its value in `init`.  Times are fitted in log
// space, so estimates stay positive; angles are reported wrapped, with theta
// reflected into [0, pi] whenever the paired azimuth is free to absorb the
// pi shift.  A free axis triggers an 8-point grid of angle starts on top of
// `init` unless options.multistart is cleared.
inline FitResult fit_larmor(const Eigen::VectorXd& t, const Eigen::VectorXd& m,
                            const LarmorParams& init,
                            const std::vector<std::string>& free_names,
                            const FitOptions& options = {}) {
  options.validate();
  require(t.size() == m.size(), "fit: time and magnetization length mismatch");
  require(init.t1 > 0.0 && init.t2 > 0.0, "fit: decay guesses must be positive");

  std::array<bool, 7> is_free{};
  for (const std::string& name : free_names) {
    bool known = false;
    for (size_t k = 0; k < detail::kLarmorNames.size(); ++k)
      if (name == detail::kLarmorNames[k]) {
        require(!is_free[k], "fit: duplicate free parameter '" + name + "'");
        is_free[k] = true;
        known = true;
      }
    require(known, "fit: unknown parameter '" + name + "'");
  }
  std::vector<size_t> free_idx;
  for (size_t k = 0; k < is_free.size(); ++k)
    if (is_free[k]) free_idx.push_back(k);
  const Index p = Index(free_idx.size());
  require(p > 0, "fit: no free parameters");

  const std::vector<Index> keep = detail::window_indices(t, options);
  const Index n = Index(keep.size());
  require(n >= 2 * p, "fit: need at least two points per free parameter");

  auto unpack = [&](const Eigen::VectorXd& x) {
    LarmorParams out = init;
    double* fields[7] = {&out.delta,   &out.t1,    &out.t2,   &out.theta_s,
                         &out.phi_s,   &out.theta_d, &out.phi_d};
    for (Index j = 0; j < p; ++j) {
      const size_t k = free_idx[size_t(j)];
      *fields[k] = (k == 1 || k == 2) ? std::exp(x[j]) : x[j];
    }
    return out;
  };
  auto residual = [&](const Eigen::VectorXd& x) {
    const LarmorParams q = unpack(x);
    Eigen::VectorXd r(n);
    for (Index i = 0; i < n; ++i)
      r[i] = detail::larmor_eval(q, t[keep[size_t(i)]], nullptr) -
             m[keep[size_t(i)]];
    return r;
  };
  auto jacobian = [&](const Eigen::VectorXd& x) {
    const LarmorParams q = unpack(x);
    const double scale[7] = {1.0, q.t1, q.t2, 1.0, 1.0, 1.0, 1.0};
    Eigen::MatrixXd jac(n, p);
    std::array<double, 7> grad;
    for (Index i = 0; i < n; ++i) {
      detail::larmor_eval(q, t[keep[size_t(i)]], &grad);
      for (Index j = 0; j < p; ++j) {
        const size_t k = free_idx[size_t(j)];
        jac(i, j) = grad[k] * scale[k];
      }
    }
    return jac;
  };

  auto pack = [&](const LarmorParams& q) {
    const double fields[7] = {q.delta,   q.t1,    q.t2,   q.theta_s,
                              q.phi_s,   q.theta_d, q.phi_d};
    Eigen::VectorXd x(p);
    for (Index j = 0; j < p; ++j) {
      const size_t k = free_idx[size_t(j)];
      x[j] = (k == 1 || k == 2) ? std::log(fields[k]) : fields[k];
    }
    return x;
  };

  // Reflection-degenerate minima in (theta, phi) call for several starting
  // axes; the detector axis gets the grid when free, otherwise the source.
  std::vector<LarmorParams> starts = {init};
  if (options.multistart) {
    const bool det_axis = is_free[5] && is_free[6];
    const bool src_axis = is_free[3] && is_free[4];
    if (det_axis || src_axis) {
      for (double theta : {0.25 * pi, 0.75 * pi})
        for (int kk = 0; kk < 4; ++kk) {
          LarmorParams s = init;
          const double phi = -0.75 * pi + 0.5 * pi * kk;
          (det_axis ? s.theta_d : s.theta_s) = theta;
          (det_axis ? s.phi_d : s.phi_s) = phi;
          starts.push_back(s);
        }
    } else if (is_free[3] || is_free[5]) {
      for (int kk = 0; kk < 8; ++kk) {
        LarmorParams s = init;
        (is_free[5] ? s.theta_d : s.theta_s) = (kk + 0.5) * pi / 8.0;
        starts.push_back(s);
      }
    } else if (is_free[4] || is_free[6]) {
      for (int kk = 0; kk < 8; ++kk) {
        LarmorParams s = init;
        (is_free[6] ? s.phi_d : s.phi_s) = -pi + (kk + 0.5) * 0.25 * pi;
        starts.push_back(s);
      }
    }
  }

  std::vector<std::string> names, units;
  for (size_t k : free_idx) {
    names.push_back(detail::kLarmorNames[k]);
    units.push_back(detail::kLarmorUnits[k]);
  }

  detail::LmOutcome best;
  bool have_best = false;
  int iterations = 0;
  std::string first_failure;
  for (const LarmorParams& s : starts) {
    try {
      detail::LmOutcome fit = detail::levenberg(
          residual, options.numeric_jacobian ? detail::JacobianFn{} : jacobian,
          pack(s), options, names);
      iterations += fit.iterations;
      if (!have_best || fit.rss < best.rss) {
        best = std::move(fit);
        have_best = true;
      }
    } catch (const numerical_error& err) {
      // a start can sit exactly on a degenerate axis (theta = 0 with free
      // phi); only fail if every start does
      if (first_failure.empty()) first_failure = err.what();
    }
  }
  if (!have_best) throw numerical_error(first_failure);

  FitResult result;
  result.names = std::move(names);
  result.units = std::move(units);
  result.rss = best.rss;
  result.converged = best.converged;
  result.iterations = iterations;
  result.std_error = detail::standard_errors(best, n);

  LarmorParams fitted = unpack(best.x);
  const bool can_reflect_d = is_free[5] && is_free[6];
  const bool can_reflect_s = is_free[3] && is_free[4];
  fitted.theta_d = wrap_angle(fitted.theta_d);
  if (fitted.theta_d < 0.0 && can_reflect_d) {
    fitted.theta_d = -fitted.theta_d;
    fitted.phi_d += pi;
  }
  fitted.theta_s = wrap_angle(fitted.theta_s);
  if (fitted.theta_s < 0.0 && can_reflect_s) {
    fitted.theta_s = -fitted.theta_s;
    fitted.phi_s += pi;
  }
  fitted.phi_d = wrap_angle(fitted.phi_d);
  fitted.phi_s = wrap_angle(fitted.phi_s);

  const double natural[7] = {fitted.delta,   fitted.t1,    fitted.t2,
                             fitted.theta_s, fitted.phi_s, fitted.theta_d,
                             fitted.phi_d};
  result.estimate.resize(p);
  for (Index j = 0; j < p; ++j) {
    const size_t k = free_idx[size_t(j)];
    result.estimate[j] = natural[k];
    // delta method for the log-space times: sigma_T = T sigma_logT
    if (k == 1 || k == 2) result.std_error[j] *= natural[k];
  }
  return result;
}

// Starting guesses for the exchange fit.
struct ExchangeGuess {
  double t1 = 30.0;      // ns
  double tphi = 37.0;    // ns
  double coupling = 0.3;  // GHz
};

// Two-stage fit of the exchange closed form.  Stage one extracts T1 from the
// correlator decay 1 - 2 exp(-t/T1), which the coupling cannot touch; stage
// two fits Tphi and J to the population difference sz1 - sz2 =
// -2 exp(-t/T1) exp(-t/Tphi) cos(2 pi J t) with T1 pinned.  Standard errors
// are per stage, so the (Tphi, J) errors are conditional on the fitted T1.
inline FitResult fit_exchange(const Eigen::VectorXd& t,
                              const Eigen::VectorXd& sz1,
                              const Eigen::VectorXd& sz2,
                              const Eigen::VectorXd& szsz,
                              const ExchangeGuess& guess,
                              const FitOptions& options = {}) {
  options.validate();
  require(t.size() == sz1.size() && t.size() == sz2.size() &&
              t.size() == szsz.size(),
          "fit: exchange series length mismatch");
  require(guess.t1 > 0.0 && guess.tphi > 0.0,
          "fit: decay guesses must be positive");
  require(guess.coupling != 0.0, "fit: coupling guess must be nonzero");

  const std::vector<Index> keep = detail::window_indices(t, options);
  const Index n = Index(keep.size());
  require(n >= 6, "fit: need at least two points per free parameter");

  Eigen::VectorXd tw(n), corr(n), diff(n);
  for (Index i = 0; i < n; ++i) {
    tw[i] = t[keep[size_t(i)]];
    corr[i] = szsz[keep[size_t(i)]];
    diff[i] = sz1[keep[size_t(i)]] - sz2[keep[size_t(i)]];
  }

  // stage one: log T1 against the correlator
  auto corr_residual = [&](const Eigen::VectorXd& x) {
    const double t1 = std::exp(x[0]);
    Eigen::VectorXd r(n);
    for (Index i = 0; i < n; ++i)
      r[i] = 1.0 - 2.0 * std::exp(-tw[i] / t1) - corr[i];
    return r;
  };
  auto corr_jacobian = [&](const Eigen::VectorXd& x) {
    const double t1 = std::exp(x[0]);
    Eigen::MatrixXd jac(n, 1);
    for (Index i = 0; i < n; ++i)
      jac(i, 0) = -2.0 * std::exp(-tw[i] / t1) * tw[i] / t1;
    return jac;
  };
  Eigen::VectorXd x1(1);
  x1[0] = std::log(guess.t1);
  const detail::LmOutcome stage1 = detail::levenberg(
      corr_residual,
      options.numeric_jacobian ? detail::JacobianFn{} : corr_jacobian, x1,
      options, {"t1"});
  const double t1_hat = std::exp(stage1.x[0]);

  // stage two: (log Tphi, J) against the difference oscillation
  auto diff_residual = [&](const Eigen::VectorXd& x) {
    const double tphi = std::exp(x[0]);
    Eigen::VectorXd r(n);
    for (Index i = 0; i < n; ++i)
      r[i] = -2.0 * std::exp(-tw[i] / t1_hat) * std::exp(-tw[i] / tphi) *
                 std::cos(two_pi * x[1] * tw[i]) -
             diff[i];
    return r;
  };
  auto diff_jacobian = [&](const Eigen::VectorXd& x) {
    const double tphi = std::exp(x[0]);
    Eigen::MatrixXd jac(n, 2);
    for (Index i = 0; i < n; ++i) {
      const double damp =
          std::exp(-tw[i] / t1_hat) * std::exp(-tw[i] / tphi);
      const double w = two_pi * x[1] * tw[i];
      jac(i, 0) = -2.0 * damp * std::cos(w) * tw[i] / tphi;
      jac(i, 1) = 2.0 * damp * std::sin(w) * two_pi * tw[i];
    }
    return jac;
  };

  // The objective is near-periodic in J with basins only ~1/(4 span) wide,
  // so a coarse scan over frequency picks the basin before the damped
  // iteration refines it.  The caller's guess stays in as a second start.
  std::vector<double> j_starts = {std::abs(guess.coupling)};
  const double span = tw[n - 1] - tw[0];
  if (span > 0.0) {
    const double dj = 1.0 / (8.0 * span);
    double best_j = j_starts[0], best_rss = inf;
    Eigen::VectorXd probe(2);
    probe[0] = std::log(guess.tphi);
    for (double j = 0.25 * j_starts[0]; j <= 2.5 * j_starts[0] + 1e-12;
         j += dj) {
      probe[1] = j;
      const double rss = diff_residual(probe).squaredNorm();
      if (rss < best_rss) {
        best_rss = rss;
        best_j = j;
      }
    }
    j_starts.push_back(best_j);
  }

  detail::LmOutcome stage2;
  bool have_best = false;
  int iterations = stage1.iterations;
  std::string first_failure;
  for (double j0 : j_starts) {
    Eigen::VectorXd x2(2);
    x2[0] = std::log(guess.tphi);
    x2[1] = j0;
    try {
      detail::LmOutcome fit = detail::levenberg(
          diff_residual,
          options.numeric_jacobian ? detail::JacobianFn{} : diff_jacobian, x2,
          options, {"tphi", "coupling"});
      iterations += fit.iterations;
      if (!have_best || fit.rss < stage2.rss) {
        stage2 = std::move(fit);
        have_best = true;
      }
    } catch (const numerical_error& err) {
      if (first_failure.empty()) first_failure = err.what();
    }
  }
  if (!have_best) throw numerical_error(first_failure);

  const double tphi_hat = std::exp(stage2.x[0]);
  const Eigen::VectorXd err1 = detail::standard_errors(stage1, n);
  const Eigen::VectorXd err2 = detail::standard_errors(stage2, n);

  FitResult result;
  result.names = {"t1", "tphi", "coupling"};
  result.units = {"ns", "ns", "GHz"};
  result.estimate.resize(3);
  result.estimate << t1_hat, tphi_hat, std::abs(stage2.x[1]);
  result.std_error.resize(3);
  result.std_error << t1_hat * err1[0], tphi_hat * err2[0], err2[1];
  result.rss = stage1.rss + stage2.rss;
  result.converged = stage1.converged && stage2.converged;
  result.iterations = iterations;
  return result;
}

}  // namespace adqc
