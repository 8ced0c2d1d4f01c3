#pragma once
// Operator-splitting one-step maps: the direct A/B splitting, the
// stochastic velocity Verlet (SVV) scheme, and the Kunita-truncation
// schemes I/II/III under naive, symmetric, and Neri compositions.
//
// Every scheme here alternates two exactly solvable flows.  The A-substep
// advances positions with velocities frozen; the B-substep solves the
// linear velocity equation v' = c - Gamma dt v over unit pseudo-time,
// whose exact solution over a fraction theta is
//
//     v <- exp(-Gamma dt theta) v + theta phi1(-Gamma dt theta) c.
//
// The operator product exp(A) exp(B) is executed A-substep first: expanding
// the composition to second order in dt and comparing term-by-term with the
// one-step expansions of the truncated Kunita flows shows that this order,
// and not its reverse, reproduces them (the discriminating difference-vs-
// Taylor-2 test below the order-2 terms pins this down).  Palindromic
// compositions are insensitive to the choice.

#include "lgv/increments.hpp"
#include "lgv/linalg.hpp"
#include "lgv/ou_integrals.hpp"
#include "lgv/taylor.hpp"
#include "lgv/types.hpp"

#include <array>
#include <cmath>
#include <deque>
#include <limits>

namespace lgv {

enum class Truncation { one = 1, two = 2, three = 3 };
enum class Composition { naive, symmetric, neri };
enum class DirectVariant { ab, sym };

/// Fourth-order composition coefficients c1..c4, d1..d3 (Neri/Yoshida),
/// d1 = 1/(2 - 2^{1/3}), d2 = 1 - 2 d1, c1 = c4 = d1/2, c2 = c3 = 1/2 - c1.
struct NeriCoefficients {
  std::array<double, 4> c;
  std::array<double, 3> d;
};

inline NeriCoefficients neri_coefficients() {
  const double d1 = 1.0 / (2.0 - std::cbrt(2.0));
  const double c1 = d1 / 2.0;
  return NeriCoefficients{{c1, 0.5 - c1, 0.5 - c1, c1}, {d1, 1.0 - 2.0 * d1, d1}};
}

namespace detail {

/// Exact B-substep matrices for one (Gamma, dt, fraction) key, plus the
/// phi2 matrix used by SVV at fraction 1.  Entries are immutable once
/// built; the cache is thread-local, so concurrent steppers never observe
/// a partially built entry.
struct FlowMatrices {
  double dt = 0.0;
  double fraction = 0.0;
  Mat gamma;
  Mat decay;  // exp(-Gamma dt fraction)
  Mat push;   // fraction phi1(-Gamma dt fraction)
  Mat curve;  // phi2(-Gamma dt fraction)
};

inline const FlowMatrices& flow_matrices(const Mat& gamma, double dt, double fraction) {
  thread_local std::deque<FlowMatrices> cache;
  for (const FlowMatrices& e : cache) {
    if (e.dt == dt && e.fraction == fraction && e.gamma.rows() == gamma.rows() &&
        (e.gamma.array() == gamma.array()).all())
      return e;
  }
  if (cache.size() > 512) cache.pop_front();
  FlowMatrices e;
  e.dt = dt;
  e.fraction = fraction;
  e.gamma = gamma;
  const Mat m = -gamma * (dt * fraction);
  e.decay = mat_exp(m);
  e.push = fraction * phi1(m);
  e.curve = phi2(m);
  cache.push_back(std::move(e));
  return cache.back();
}

}  // namespace detail

/// A-substep: positions shift by the (already composition-scaled)
/// displacement, velocities frozen.
inline PhaseState a_flow(const PhaseState& s, const Vec& displacement) {
  if (displacement.size() != s.x.size()) throw ConfigError("a_flow: dimension mismatch");
  return PhaseState{s.x + displacement, s.v};
}

/// B-substep over a fraction of the step: exact solution of the frozen-x
/// velocity equation, v <- exp(-Gamma dt th) v + th phi1(-Gamma dt th) c.
/// Negative fractions (Neri's d2) go through the same matrices.
inline PhaseState b_flow(const LangevinModel& model, const PhaseState& s, const Vec& c,
                         double dt, double fraction) {
  if (c.size() != s.v.size() || s.dim() != model.n)
    throw ConfigError("b_flow: dimension mismatch");
  const detail::FlowMatrices& m = detail::flow_matrices(model.gamma, dt, fraction);
  return PhaseState{s.x, m.decay * s.v + m.push * c};
}

namespace detail {

/// Scalar weight of the triple bracket [[X_0, X_j], X_0] in the truncated
/// logarithm of the solution flow, expressed through the sampled variables:
/// 3 dV + (dt/6) dU, i.e. one sixth of the concatenation-bracket integral
/// combination 3 I_(0,j,0) - dt^2 dW / 2.
///
/// The weight is pinned by matching the exact flow of the combined field
/// against the order-3 Ito-Taylor map: writing the operator as
/// dt X_0 + dW X_j + u [X_0, X_j] + w [[X_0, X_j], X_0] and expanding its
/// unit-time flow, the x row needs the noise content
/// sigma I_(j,0) - Gamma sigma I_(j,0,0); collecting coefficients of
/// (dW, dU, dV) in both rows forces u = dU and w = 3 dV + dt dU / 6, and the
/// same pair satisfies every velocity-row coefficient simultaneously.  With
/// w = dV alone the flow acquires a Gamma sigma (dt dU / 6 + 2 dV) defect,
/// an order dt^{5/2} one-step error that drops the scheme to strong order 2;
/// the dt^{3.5} one-step difference against Taylor-3 asserted in the tests
/// discriminates the two choices sharply.
inline Vec bracket_weight(const StepIncrements& inc) {
  return 3.0 * inc.dV + (inc.dt / 6.0) * inc.dU;
}

/// Displacement integrated by the A-flow of the given truncation over a
/// fraction theta, evaluated at the current velocity.
inline Vec a_displacement(const LangevinModel& model, const PhaseState& s,
                          const StepIncrements& inc, Truncation trunc, double theta) {
  Vec d = inc.dt * s.v;
  if (trunc >= Truncation::two) d -= model.sigma * inc.dU;
  if (trunc >= Truncation::three) d += model.gamma * (model.sigma * bracket_weight(inc));
  return theta * d;
}

/// Constant c driving the B-flow of the given truncation at the current
/// position.  The Df(x) sigma dV product always uses the forward
/// difference, matching the published construction of truncation III.
inline Vec b_constant(const LangevinModel& model, const PhaseState& s,
                      const StepIncrements& inc, Truncation trunc) {
  Vec c = inc.dt * checked_force(model, s.x) + model.sigma * inc.dW;
  if (trunc >= Truncation::two) c += model.gamma * (model.sigma * inc.dU);
  if (trunc >= Truncation::three) {
    const Vec sv = model.sigma * bracket_weight(inc);
    c -= jvp_fd(model, s.x, sv) + model.gamma * (model.gamma * sv);
  }
  return c;
}

}  // namespace detail

/// One step of truncation I/II/III under the requested composition.
inline PhaseState trunc_step(const LangevinModel& model, const PhaseState& s,
                             const StepIncrements& inc, Truncation trunc, Composition comp) {
  if (s.dim() != model.n || inc.dW.size() != model.n)
    throw ConfigError("trunc_step: dimension mismatch between model, state and increments");
  if (!s.finite()) throw NumericalError("trunc_step: non-finite state");
  if (comp == Composition::neri && trunc != Truncation::three)
    throw ConfigError("trunc_step: the Neri composition requires truncation III");
  if (trunc >= Truncation::two && !inc.has_area)
    throw ConfigError("trunc_step: truncation II requires the dU increment");
  if (trunc >= Truncation::three && !inc.has_bracket)
    throw ConfigError("trunc_step: truncation III requires the dV increment");

  PhaseState out = s;
  const auto a = [&](double theta) {
    out = a_flow(out, detail::a_displacement(model, out, inc, trunc, theta));
  };
  const auto b = [&](double theta) {
    out = b_flow(model, out, detail::b_constant(model, out, inc, trunc), inc.dt, theta);
  };

  switch (comp) {
    case Composition::naive:
      a(1.0);
      b(1.0);
      break;
    case Composition::symmetric:
      a(0.5);
      b(1.0);
      a(0.5);
      break;
    case Composition::neri: {
      const NeriCoefficients k = neri_coefficients();
      a(k.c[0]);
      b(k.d[0]);
      a(k.c[1]);
      b(k.d[1]);
      a(k.c[2]);
      b(k.d[2]);
      a(k.c[3]);
      break;
    }
  }
  if (!out.finite()) throw NumericalError("trunc_step: non-finite state produced");
  return out;
}

/// One step of the direct splitting: A advances x over the full step, B
/// solves the velocity equation exactly with the true OU noise integral J1.
/// The symmetric variant wraps the single B-substep in two half A-substeps.
inline PhaseState direct_split_step(const LangevinModel& model, const PhaseState& s, double dt,
                                    const OuPair& noise, DirectVariant variant) {
  if (s.dim() != model.n || noise.J1.size() != model.n)
    throw ConfigError("direct_split_step: dimension mismatch");
  if (!s.finite()) throw NumericalError("direct_split_step: non-finite state");
  const detail::FlowMatrices& m = detail::flow_matrices(model.gamma, dt, 1.0);

  const double half = variant == DirectVariant::sym ? 0.5 : 1.0;
  PhaseState out{s.x + half * dt * s.v, s.v};
  const Vec f = detail::checked_force(model, out.x);
  out.v = m.decay * out.v + dt * (m.push * f) + noise.J1;
  if (variant == DirectVariant::sym) out.x += 0.5 * dt * out.v;
  if (!out.finite()) throw NumericalError("direct_split_step: non-finite state produced");
  return out;
}

/// One step of stochastic velocity Verlet:
///   x1 = x + c1 v dt + c2 f(x) dt^2 + J10
///   v1 = c0 v + c1 f(x) dt + c2 (f(x1) - f(x)) dt + J1
/// with c0 = exp(-Gamma dt), c1 = phi1(-Gamma dt), c2 = phi2(-Gamma dt).
inline PhaseState svv_step(const LangevinModel& model, const PhaseState& s, double dt,
                           const OuPair& noise) {
  if (s.dim() != model.n || noise.J1.size() != model.n || noise.J10.size() != model.n)
    throw ConfigError("svv_step: dimension mismatch");
  if (!s.finite()) throw NumericalError("svv_step: non-finite state");
  const detail::FlowMatrices& m = detail::flow_matrices(model.gamma, dt, 1.0);

  const Vec f0 = detail::checked_force(model, s.x);
  const Vec x1 = s.x + dt * (m.push * s.v) + dt * dt * (m.curve * f0) + noise.J10;
  const Vec f1 = detail::checked_force(model, x1);
  const Vec v1 = m.decay * s.v + dt * (m.push * f0) + dt * (m.curve * (f1 - f0)) + noise.J1;
  PhaseState out{x1, v1};
  if (!out.finite()) throw NumericalError("svv_step: non-finite state produced");
  return out;
}

}  // namespace lgv
