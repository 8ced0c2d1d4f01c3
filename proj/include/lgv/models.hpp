#pragma once
// Built-in test systems: the noisy pendulum, the 7-particle Lennard-Jones
// cluster in R^3, and a damped harmonic oscillator whose linear SDE has
// closed-form statistics (the exact-solution oracle used in tests).

#include "lgv/linalg.hpp"
#include "lgv/quadrature.hpp"
#include "lgv/types.hpp"

#include <cmath>
#include <numbers>

namespace lgv {

/// Scalar pendulum, f(x) = -sin x, with analytic Jacobian-vector product.
/// Defaults: Gamma = 1, sigma = 1, (x0, v0) = (1, 0); override per run.
inline LangevinModel pendulum_model() {
  LangevinModel m;
  m.name = "pendulum";
  m.n = 1;
  m.gamma = Mat::Identity(1, 1);
  m.sigma = Mat::Identity(1, 1);
  m.force = [](const Vec& x) { return Vec::Constant(1, -std::sin(x(0))); };
  m.jvp = [](const Vec& x, const Vec& u) { return Vec::Constant(1, -std::cos(x(0)) * u(0)); };
  m.init = PhaseState{Vec::Ones(1), Vec::Zero(1)};
  m.energy = [](const PhaseState& s) {
    return 0.5 * s.v.squaredNorm() + (1.0 - std::cos(s.x(0)));
  };
  return m;
}

namespace detail {
constexpr double kMinSeparation = 1e-6;
}

/// Pairwise Lennard-Jones force on N = size/3 particles, no cutoff:
/// magnitude 12 r^{-13} - 6 r^{-7} along each separation vector.
inline Vec lj_force(const Vec& x) {
  if (x.size() % 3 != 0) throw ConfigError("lj_force: coordinate count not a multiple of 3");
  const auto n_particles = x.size() / 3;
  Vec f = Vec::Zero(x.size());
  for (Eigen::Index i = 0; i < n_particles; ++i) {
    for (Eigen::Index j = i + 1; j < n_particles; ++j) {
      const Eigen::Vector3d d = x.segment<3>(3 * i) - x.segment<3>(3 * j);
      const double r = d.norm();
      if (r < detail::kMinSeparation)
        throw NumericalError("lj_force: particle collision (separation below threshold)");
      const double inv = 1.0 / r;
      const double inv6 = std::pow(inv, 6);
      // -dU/dr for U = r^{-12} - r^{-6}, applied along the unit vector.
      const double magnitude = (12.0 * inv6 * inv6 - 6.0 * inv6) * inv;
      const Eigen::Vector3d pair = (magnitude * inv) * d;
      f.segment<3>(3 * i) += pair;
      f.segment<3>(3 * j) -= pair;
    }
  }
  return f;
}

/// Total Lennard-Jones potential energy sum r^{-12} - r^{-6} over pairs.
inline double lj_energy(const Vec& x) {
  if (x.size() % 3 != 0) throw ConfigError("lj_energy: coordinate count not a multiple of 3");
  const auto n_particles = x.size() / 3;
  double e = 0.0;
  for (Eigen::Index i = 0; i < n_particles; ++i) {
    for (Eigen::Index j = i + 1; j < n_particles; ++j) {
      const double r = (x.segment<3>(3 * i) - x.segment<3>(3 * j)).norm();
      if (r < detail::kMinSeparation)
        throw NumericalError("lj_energy: particle collision (separation below threshold)");
      const double inv6 = std::pow(1.0 / r, 6);
      e += inv6 * inv6 - inv6;
    }
  }
  return e;
}

/// Seven Lennard-Jones particles: a regular hexagon of side 2^{1/6} (the
/// pair-potential minimum) plus its center, in the z = 0 plane, at rest.
/// Gamma = 10 I, sigma = sqrt(2 kT Gamma) = sqrt(6) I with kT = 0.3.
/// Directional derivatives fall back to finite differences.
inline LangevinModel lj7_model() {
  constexpr int n = 21;
  LangevinModel m;
  m.name = "lj7";
  m.n = n;
  m.gamma = 10.0 * Mat::Identity(n, n);
  m.sigma = std::sqrt(2.0 * 0.3 * 10.0) * Mat::Identity(n, n);
  m.force = [](const Vec& x) { return lj_force(x); };
  Vec x0 = Vec::Zero(n);
  const double side = std::pow(2.0, 1.0 / 6.0);
  for (int k = 0; k < 6; ++k) {
    const double angle = k * std::numbers::pi / 3.0;
    x0(3 * k) = side * std::cos(angle);
    x0(3 * k + 1) = side * std::sin(angle);
  }
  // Particle 7 sits at the origin (all-zero entries already in place).
  m.init = PhaseState{x0, Vec::Zero(n)};
  m.energy = [](const PhaseState& s) { return 0.5 * s.v.squaredNorm() + lj_energy(s.x); };
  return m;
}

/// Damped harmonic oscillator f(x) = -omega^2 x with scalar friction and
/// noise; the linear SDE the exact-solution oracles below describe.
inline LangevinModel harmonic_model(double omega, double gamma = 1.0, double sigma = 1.0) {
  LangevinModel m;
  m.name = "harmonic";
  m.n = 1;
  m.gamma = Mat::Constant(1, 1, gamma);
  m.sigma = Mat::Constant(1, 1, sigma);
  m.force = [omega](const Vec& x) { return Vec::Constant(1, -omega * omega * x(0)); };
  m.jvp = [omega](const Vec&, const Vec& u) { return Vec::Constant(1, -omega * omega * u(0)); };
  m.init = PhaseState{Vec::Ones(1), Vec::Zero(1)};
  m.energy = [omega](const PhaseState& s) {
    return 0.5 * s.v.squaredNorm() + 0.5 * omega * omega * s.x.squaredNorm();
  };
  return m;
}

/// Exact phase-space propagator exp(A t) for A = [[0, 1], [-omega^2, -gamma]],
/// in closed form: with mu = -gamma/2 and D = gamma^2/4 - omega^2,
/// (A - mu I)^2 = D I, so exp(A t) = e^{mu t} (ch I + sh (A - mu I)) where
/// (ch, sh) are (cosh(s t), sinh(s t)/s) for D = s^2 > 0 and
/// (cos(s t), sin(s t)/s) for D = -s^2 < 0, with series near D = 0.
inline Eigen::Matrix2d harmonic_propagator(double omega, double gamma, double t) {
  const double mu = -gamma / 2.0;
  const double disc = gamma * gamma / 4.0 - omega * omega;
  const double s = std::sqrt(std::abs(disc));
  double ch, sh;
  if (s * std::abs(t) < 1e-4) {
    const double z = disc * t * t;  // (s t)^2 signed by disc
    ch = 1.0 + z / 2.0 + z * z / 24.0;
    sh = t * (1.0 + z / 6.0 + z * z / 120.0);
  } else if (disc > 0.0) {
    ch = std::cosh(s * t);
    sh = std::sinh(s * t) / s;
  } else {
    ch = std::cos(s * t);
    sh = std::sin(s * t) / s;
  }
  Eigen::Matrix2d shifted;  // A - mu I
  shifted << -mu, 1.0, -omega * omega, -gamma - mu;
  return std::exp(mu * t) * (ch * Eigen::Matrix2d::Identity() + sh * shifted);
}

/// Covariance of the stochastic response integral(0,t) exp(A (t-s)) B dW
/// with B = (0, sigma): the Gram integral of the closed-form propagator,
/// evaluated by composite Gauss-Legendre quadrature.
inline Eigen::Matrix2d harmonic_noise_covariance(double omega, double gamma, double sigma,
                                                 double t) {
  if (!(t > 0.0)) throw ConfigError("harmonic_noise_covariance: t must be positive");
  const auto kernel = [&](double s) {
    const Eigen::Matrix2d e = harmonic_propagator(omega, gamma, t - s);
    const Eigen::Vector2d column = sigma * e.col(1);
    return Mat(column * column.transpose());
  };
  const int panels = std::max(1, static_cast<int>(std::ceil((gamma + omega) * t / 2.0)));
  const Mat c = composite_gauss_legendre(kernel, 0.0, t, panels);
  Eigen::Matrix2d out = (c + c.transpose()) / 2.0;
  return out;
}

}  // namespace lgv
