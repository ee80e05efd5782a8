#pragma once

// Space-time magnetization records exchanged between the physics engines
// and the Fourier analysis: rows are lattice sites (spacing 1), columns are
// uniformly spaced times.

#include "adqc/common.hpp"

namespace adqc {

// Which single-qubit axis the stored magnetization refers to.  The
// distinction matters downstream: the z-basis density field carries a
// static background that spectral ridge extraction must skip.
enum class FieldBasis { x, z };

struct SpaceTimeField {
  Eigen::MatrixXd values;  // sites x time steps
  double dt = 0.0;         // ns between columns
  FieldBasis basis = FieldBasis::x;

  Index sites() const { return values.rows(); }
  Index steps() const { return values.cols(); }

  void validate() const {
    require(sites() >= 2 && steps() >= 2,
            "field: need at least 2 sites and 2 time steps");
    require(dt > 0.0 && std::isfinite(dt), "field: dt must be positive");
    require(values.cwiseAbs().maxCoeff() <= 1.0 + 1e-6,
            "field: magnetization outside [-1, 1]");
  }
};

// Discrete momenta of an L-site ring, k_m = 2 pi m / L for m = 0..L-1.
inline Eigen::VectorXd momentum_grid(Index length) {
  require(length >= 1, "momentum_grid: empty ring");
  Eigen::VectorXd k(length);
  for (Index m = 0; m < length; ++m) k[m] = two_pi * double(m) / double(length);
  return k;
}

}  // namespace adqc
