#pragma once
// Per-step stochastic increments and their exact joint law.
//
// Besides the plain Brownian increment dW, the schemes consume multiple
// Ito integrals over each step [0, dt] (time measured from the step start):
//
//   I_(j,0)   = ∫∫ dW^j ds          I_(0,j)   = ∫ s dW^j
//   I_(j,0,0) = ∫∫∫ dW^j ds ds     I_(0,j,0) = ∫∫ s dW^j ds
//
// and the derived centered increments
//
//   dU = I_(0,j) - (dt/2) dW        dV = (I_(0,j,0) - I_(j,0,0) - dt dU)/9,
//
// whose per-component joint covariance with dW is
//
//   Cov(dW, dU, dV) = [[dt, 0, 0], [0, dt^3/12, -dt^4/216],
//                      [0, -dt^4/216, dt^5/2430]].

#include "lgv/linalg.hpp"
#include "lgv/rng.hpp"
#include "lgv/types.hpp"

namespace lgv {

/// Increment bundle for one step of size dt. Which members are populated
/// depends on the producer: analytic sampling fills the area and bracket
/// groups but not the raw triple integrals; path quadrature fills
/// everything; a bare Brownian increment fills only dW.
struct StepIncrements {
  double dt = 0.0;
  Vec dW;
  Vec I_j0, I_0j, dU;  // present when has_area
  Vec dV;              // present when has_bracket
  Vec I_j00, I_0j0;    // present when has_triple
  bool has_area = false;
  bool has_bracket = false;
  bool has_triple = false;

  /// All-zero increments (deterministic runs and noise-free tests).
  static StepIncrements zeros(int n, double dt) {
    StepIncrements inc;
    inc.dt = dt;
    inc.dW = inc.I_j0 = inc.I_0j = inc.dU = inc.dV = Vec::Zero(n);
    inc.I_j00 = inc.I_0j0 = Vec::Zero(n);
    inc.has_area = inc.has_bracket = inc.has_triple = true;
    return inc;
  }
};

/// Covariance of (dW, dU, dV) for one noise component.
inline Mat increment_covariance(double dt) {
  if (!(dt > 0.0)) throw ConfigError("increment_covariance: dt must be positive");
  Mat c(3, 3);
  const double dt2 = dt * dt;
  c << dt, 0.0, 0.0,                                        //
      0.0, dt * dt2 / 12.0, -dt2 * dt2 / 216.0,             //
      0.0, -dt2 * dt2 / 216.0, dt * dt2 * dt2 / 2430.0;
  return c;
}

/// Draw (dW, dU, dV) with the exact joint law, independently per component,
/// and fill I_0j/I_j0 through their defining identities. The raw triple
/// integrals stay unset: no scheme needs them beyond dV.
///
/// Consumes the 3n normals (step, 0..3n-1) of the stream.
inline StepIncrements sample_increments(int n, double dt, const RngStream& stream,
                                        std::uint64_t step = 0) {
  if (n <= 0) throw ConfigError("sample_increments: n must be positive");
  if (dt < 0.0) throw ConfigError("sample_increments: dt must be non-negative");
  StepIncrements inc;
  inc.dt = dt;
  inc.dW = inc.I_j0 = inc.I_0j = inc.dU = inc.dV = Vec::Zero(n);
  inc.has_area = inc.has_bracket = true;
  if (dt == 0.0) return inc;

  // Factor the unit-step covariance once; the rows of its Cholesky factor
  // scale exactly as (dt^{1/2}, dt^{3/2}, dt^{5/2}), so one factorization
  // serves every step size with perfect conditioning.
  static const Eigen::Matrix3d l1 = [] {
    return Eigen::Matrix3d(cholesky(increment_covariance(1.0)));
  }();
  const double sq = std::sqrt(dt);
  const Eigen::Vector3d row_scale(sq, dt * sq, dt * dt * sq);

  const Vec z = stream.normals(step, 3 * n);
  for (int j = 0; j < n; ++j) {
    const Eigen::Vector3d y = row_scale.asDiagonal() * (l1 * z.segment<3>(3 * j));
    inc.dW(j) = y(0);
    inc.dU(j) = y(1);
    inc.dV(j) = y(2);
  }
  inc.I_0j = inc.dU + (dt / 2.0) * inc.dW;
  inc.I_j0 = dt * inc.dW - inc.I_0j;
  return inc;
}

}  // namespace lgv
