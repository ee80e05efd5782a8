#pragma once

// Single-qubit noise model: relaxation time T1 and pure-dephasing time Tphi,
// both in ns, either of which may be infinite.  The derived transverse decay
// time obeys 1/T2 = 1/Tphi + 1/(2 T1).

#include "adqc/common.hpp"

namespace adqc {

struct NoiseParams {
  double t1 = inf;    // ns
  double tphi = inf;  // ns

  NoiseParams() = default;
  NoiseParams(double t1_ns, double tphi_ns) : t1(t1_ns), tphi(tphi_ns) {
    require(t1 > 0.0, "noise: T1 must be positive");
    require(tphi > 0.0, "noise: Tphi must be positive");
  }

  double t2() const { return 1.0 / (1.0 / tphi + 0.5 / t1); }
};

// Measurement or preparation axis by polar/azimuthal angle.
struct BlochAxis {
  double theta = 0.0;
  double phi = 0.0;
};

struct BlochState {
  Eigen::Vector3d n{0.0, 0.0, 1.0};

  BlochState() = default;
  explicit BlochState(const Eigen::Vector3d& v) : n(v) {
    require(n.norm() <= 1.0 + 1e-9, "bloch state: |n| must not exceed 1");
  }
  BlochState(double nx, double ny, double nz)
      : BlochState(Eigen::Vector3d{nx, ny, nz}) {}
};

}  // namespace adqc
