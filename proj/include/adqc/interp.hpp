#pragma once

// Shape-preserving piecewise-cubic interpolation (Fritsch-Carlson).  Used for
// annealing-schedule lookups where overshoot between tabulated points would
// produce unphysical A(s), B(s) values.

#include "adqc/common.hpp"

#include <algorithm>

namespace adqc {

template <typename Real = double>
class PchipInterpolant {
 public:
  using Vec = Eigen::Vector<Real, Eigen::Dynamic>;

  PchipInterpolant() = default;

  PchipInterpolant(const Vec& x, const Vec& y) : x_(x), y_(y) {
    require(x.size() == y.size(), "interpolant: size mismatch");
    require(x.size() >= 2, "interpolant: need at least two points");
    for (Index i = 0; i + 1 < x.size(); ++i)
      require(x[i] < x[i + 1], "interpolant: abscissae must increase");
    m_ = derivatives(x, y);
  }

  Real min_x() const { return x_[0]; }
  Real max_x() const { return x_[x_.size() - 1]; }

  Real operator()(Real q) const {
    require_domain(q >= x_[0] && q <= x_[x_.size() - 1],
                   "interpolant: query outside tabulated domain");
    Index i = segment(q);
    const Real h = x_[i + 1] - x_[i];
    const Real t = (q - x_[i]) / h;
    const Real t2 = t * t;
    const Real t3 = t2 * t;
    const Real h00 = 2 * t3 - 3 * t2 + 1;
    const Real h10 = t3 - 2 * t2 + t;
    const Real h01 = -2 * t3 + 3 * t2;
    const Real h11 = t3 - t2;
    return h00 * y_[i] + h10 * h * m_[i] + h01 * y_[i + 1] + h11 * h * m_[i + 1];
  }

 private:
  Index segment(Real q) const {
    const Real* begin = x_.data();
    const Real* end = begin + x_.size();
    Index i = std::upper_bound(begin, end, q) - begin - 1;
    return std::clamp<Index>(i, 0, x_.size() - 2);
  }

  // Fritsch-Carlson tangents: harmonic-mean interior slopes, Moler-style
  // one-sided ends clipped to preserve monotone data.
  static Vec derivatives(const Vec& x, const Vec& y) {
    const Index n = x.size();
    Vec m(n);
    if (n == 2) {
      m[0] = m[1] = (y[1] - y[0]) / (x[1] - x[0]);
      return m;
    }
    Vec h(n - 1), d(n - 1);
    for (Index i = 0; i < n - 1; ++i) {
      h[i] = x[i + 1] - x[i];
      d[i] = (y[i + 1] - y[i]) / h[i];
    }
    for (Index i = 1; i < n - 1; ++i) {
      if (d[i - 1] * d[i] <= 0) {
        m[i] = 0;
      } else {
        const Real w1 = 2 * h[i] + h[i - 1];
        const Real w2 = h[i] + 2 * h[i - 1];
        m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
      }
    }
    m[0] = end_tangent(h[0], h[1], d[0], d[1]);
    m[n - 1] = end_tangent(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    return m;
  }

  static Real end_tangent(Real h0, Real h1, Real d0, Real d1) {
    Real t = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (t * d0 <= 0) return 0;
    if (d0 * d1 < 0 && std::abs(t) > 3 * std::abs(d0)) return 3 * d0;
    return t;
  }

  Vec x_, y_, m_;
};

}  // namespace adqc
