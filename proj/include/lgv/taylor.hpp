#pragma once
// Strong Ito-Taylor one-step maps of orders 1, 2, 3 for the additive-noise
// Langevin equation, with the coefficient functions written out in closed
// form.  With drift a(x, v) = (v, f(x) - Gamma v) and constant diffusion
// (0, sigma), the only surviving iterated integrals through order 3 are
// dW, I_(j,0) and I_(j,0,0); every coefficient involving a repeated noise
// index vanishes because the noise is additive.
//
// Order 1 adds      (v; f - Gamma v) dt + (0; sigma dW)
// Order 2 adds      (f - Gamma v; Df v - Gamma f + Gamma^2 v) dt^2/2
//                 + (sigma I_j0; -Gamma sigma I_j0)
// Order 3 adds      (Df v - Gamma f + Gamma^2 v;
//                    D2f[v,v] - Gamma Df v + (Df + Gamma^2)(f - Gamma v)) dt^3/6
//                 + (-Gamma sigma I_j00; (Df + Gamma^2) sigma I_j00)
//
// The order-3 deterministic coefficient is L0 L0 a computed directly; the
// velocity component D2f[v,v] - Gamma Df v + (Df + Gamma^2)(f - Gamma v)
// is what either arrangement of the Gamma terms reduces to when Gamma is
// constant, since then D[Gamma f](x) v = Gamma Df(x) v.

#include "lgv/increments.hpp"
#include "lgv/types.hpp"

#include <cmath>
#include <limits>

namespace lgv {

enum class TaylorOrder { one = 1, two = 2, three = 3 };

namespace detail {

constexpr double kTinyDirection = 1e-300;

inline Vec checked_force(const LangevinModel& model, const Vec& x) {
  Vec f = model.force(x);
  if (!f.allFinite()) throw NumericalError("taylor: non-finite force");
  return f;
}

}  // namespace detail

/// Forward-difference Jacobian-vector product (f(x + eps u) - f(x)) / eps,
/// the fallback when the model carries no analytic jvp.
inline Vec jvp_fd(const LangevinModel& model, const Vec& x, const Vec& u) {
  const double scale = u.norm();
  if (scale < detail::kTinyDirection) return Vec::Zero(x.size());
  const double eps =
      std::sqrt(std::numeric_limits<double>::epsilon()) * (1.0 + x.norm()) / scale;
  const Vec fp = detail::checked_force(model, x + eps * u);
  const Vec f0 = detail::checked_force(model, x);
  return (fp - f0) / eps;
}

/// Df(x) u through the analytic jvp when present, else jvp_fd.
inline Vec apply_jvp(const LangevinModel& model, const Vec& x, const Vec& u) {
  if (model.jvp) {
    Vec out = model.jvp(x, u);
    if (!out.allFinite()) throw NumericalError("taylor: non-finite jvp");
    return out;
  }
  return jvp_fd(model, x, u);
}

/// Second directional derivative D[Df(x)v]v = D2f(x)[v, v].  With an
/// analytic jvp this is a central difference of x -> Df(x)v; without one it
/// nests the finite-difference device centrally, which collapses to the
/// second central difference of f along v.
inline Vec second_directional(const LangevinModel& model, const Vec& x, const Vec& v) {
  const double scale = v.norm();
  if (scale < detail::kTinyDirection) return Vec::Zero(x.size());
  const double machine = std::numeric_limits<double>::epsilon();
  if (model.jvp) {
    const double eps = std::cbrt(machine) * (1.0 + x.norm()) / scale;
    const Vec gp = model.jvp(x + eps * v, v);
    const Vec gm = model.jvp(x - eps * v, v);
    if (!gp.allFinite() || !gm.allFinite()) throw NumericalError("taylor: non-finite jvp");
    return (gp - gm) / (2.0 * eps);
  }
  const double eps = std::pow(machine, 0.25) * (1.0 + x.norm()) / scale;
  const Vec fp = detail::checked_force(model, x + eps * v);
  const Vec f0 = detail::checked_force(model, x);
  const Vec fm = detail::checked_force(model, x - eps * v);
  return (fp - 2.0 * f0 + fm) / (eps * eps);
}

/// One strong Ito-Taylor step of the requested order.
inline PhaseState taylor_step(const LangevinModel& model, const PhaseState& s,
                              const StepIncrements& inc, TaylorOrder order) {
  const int n = model.n;
  if (s.dim() != n || inc.dW.size() != n)
    throw ConfigError("taylor_step: dimension mismatch between model, state and increments");
  if (!s.finite()) throw NumericalError("taylor_step: non-finite state");
  const int rank = static_cast<int>(order);
  if (rank >= 2 && !inc.has_area)
    throw ConfigError("taylor_step: order >= 2 requires the I_(j,0) increment");
  if (rank >= 3 && !inc.has_triple)
    throw ConfigError("taylor_step: order 3 requires the I_(j,0,0) increment");

  const double dt = inc.dt;
  const Mat& g = model.gamma;
  const Mat& sg = model.sigma;
  const Vec f = detail::checked_force(model, s.x);
  const Vec drift_v = f - g * s.v;

  Vec dx = dt * s.v;
  Vec dv = dt * drift_v + sg * inc.dW;

  if (rank >= 2) {
    const Vec dfv = apply_jvp(model, s.x, s.v);
    const Vec l0a_v = dfv - g * f + g * (g * s.v);  // "Df(x)v - Gamma f(x) + Gamma^2 v"
    const Vec area = sg * inc.I_j0;
    const double h2 = dt * dt / 2.0;
    dx += h2 * drift_v + area;
    dv += h2 * l0a_v - g * area;

    if (rank >= 3) {
      const Vec d2fvv = second_directional(model, s.x, s.v);
      const Vec l00_v =
          d2fvv - g * dfv + apply_jvp(model, s.x, drift_v) + g * (g * drift_v);
      const Vec triple = sg * inc.I_j00;
      const double h3 = dt * dt * dt / 6.0;
      dx += h3 * l0a_v - g * triple;
      dv += h3 * l00_v + apply_jvp(model, s.x, triple) + g * (g * triple);
    }
  }

  PhaseState out{s.x + dx, s.v + dv};
  if (!out.finite()) throw NumericalError("taylor_step: non-finite state produced");
  return out;
}

}  // namespace lgv
