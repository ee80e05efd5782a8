#pragma once

// Annealing schedule: tabulated transverse-field amplitude A(s) and problem
// energy scale B(s) in GHz over the normalized anneal parameter s in [0, 1].
// A must fall monotonically, B must grow monotonically; lookups interpolate
// with a shape-preserving cubic so tabulation gaps cannot overshoot.

#include "adqc/common.hpp"
#include "adqc/interp.hpp"

#include <utility>

namespace adqc {

class AnnealSchedule {
 public:
  AnnealSchedule(Eigen::VectorXd s, Eigen::VectorXd a_ghz, Eigen::VectorXd b_ghz,
                 std::string source = "unnamed")
      : s_(std::move(s)),
        a_ghz_(std::move(a_ghz)),
        b_ghz_(std::move(b_ghz)),
        source_(std::move(source)) {
    require(s_.size() == a_ghz_.size() && s_.size() == b_ghz_.size(),
            "schedule: column length mismatch");
    require(s_.size() >= 4, "schedule: need at least four tabulated points");
    require(std::abs(s_[0]) <= 1e-9 && std::abs(s_[s_.size() - 1] - 1.0) <= 1e-9,
            "schedule: s must cover [0, 1]");
    for (Index i = 0; i + 1 < s_.size(); ++i) {
      require(s_[i] < s_[i + 1], "schedule: s must be strictly increasing");
      require(a_ghz_[i + 1] <= a_ghz_[i] + 1e-12,
              "schedule: A(s) must be non-increasing");
      require(b_ghz_[i + 1] >= b_ghz_[i] - 1e-12,
              "schedule: B(s) must be non-decreasing");
    }
    require(a_ghz_.minCoeff() >= 0.0 && b_ghz_.minCoeff() >= 0.0,
            "schedule: A and B must be non-negative");
    a_interp_ = PchipInterpolant<double>(s_, a_ghz_);
    b_interp_ = PchipInterpolant<double>(s_, b_ghz_);
  }

  // Transverse-field amplitude in GHz.  Throws std::domain_error off-table.
  double a(double s) const { return a_interp_(s); }
  // Problem energy scale in GHz.
  double b(double s) const { return b_interp_(s); }

  const Eigen::VectorXd& s_grid() const { return s_; }
  const Eigen::VectorXd& a_grid() const { return a_ghz_; }
  const Eigen::VectorXd& b_grid() const { return b_ghz_; }
  const std::string& source() const { return source_; }

  // Synthetic default schedule (version "builtin-1"): A falls from 10 GHz to
  // zero, B grows from zero to 10 GHz.  The same table ships as
  // data/default_schedule.tsv.
  static AnnealSchedule builtin() {
    const Index n = 51;
    Eigen::VectorXd s(n), a(n), b(n);
    for (Index i = 0; i < n; ++i) {
      const double si = static_cast<double>(i) / static_cast<double>(n - 1);
      s[i] = si;
      a[i] = 10.0 * (1.0 - si) * std::exp(-6.0 * si);
      b[i] = 10.0 * si * si;
    }
    return AnnealSchedule(std::move(s), std::move(a), std::move(b), "builtin-1");
  }

 private:
  Eigen::VectorXd s_, a_ghz_, b_ghz_;
  std::string source_;
  PchipInterpolant<double> a_interp_, b_interp_;
};

}  // namespace adqc
