#include "lgv/taylor.hpp"

#include "lgv/linalg.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace lgv;

namespace {

LangevinModel scalar_model(std::function<Vec(const Vec&)> force, double gamma, double sigma,
                           bool analytic_jvp, std::function<Vec(const Vec&, const Vec&)> jvp = {}) {
  LangevinModel m;
  m.name = "scalar";
  m.n = 1;
  m.gamma = Mat::Constant(1, 1, gamma);
  m.sigma = Mat::Constant(1, 1, sigma);
  m.force = std::move(force);
  if (analytic_jvp) m.jvp = std::move(jvp);
  return m;
}

LangevinModel pendulum(double gamma, double sigma, bool analytic_jvp) {
  return scalar_model([](const Vec& x) { return Vec::Constant(1, -std::sin(x(0))); }, gamma,
                      sigma, analytic_jvp,
                      [](const Vec& x, const Vec& u) { return Vec::Constant(1, -std::cos(x(0)) * u(0)); });
}

LangevinModel harmonic(double omega, double gamma, double sigma) {
  return scalar_model([omega](const Vec& x) { return Vec::Constant(1, -omega * omega * x(0)); },
                      gamma, sigma, true,
                      [omega](const Vec&, const Vec& u) { return Vec::Constant(1, -omega * omega * u(0)); });
}

StepIncrements manual_increments(double dt, double dw, double ij0, double ij00) {
  StepIncrements inc = StepIncrements::zeros(1, dt);
  inc.dW(0) = dw;
  inc.I_j0(0) = ij0;
  inc.I_0j(0) = dt * dw - ij0;
  inc.dU(0) = inc.I_0j(0) - 0.5 * dt * dw;
  inc.I_j00(0) = ij00;
  inc.has_area = true;
  inc.has_bracket = true;
  inc.has_triple = true;
  return inc;
}

}  // namespace

TEST_CASE("jvp_fd and second_directional", "[taylor]") {
  const LangevinModel pend = pendulum(1.0, 1.0, false);
  const Vec zero = Vec::Zero(1);

  CHECK(jvp_fd(pend, zero, Vec::Zero(1)).norm() == 0.0);
  CHECK(jvp_fd(pend, zero, Vec::Ones(1))(0) == Catch::Approx(-1.0).margin(1e-6));

  // Linearity within finite-difference tolerance.
  const Vec x = Vec::Constant(1, 0.4);
  const Vec u = Vec::Constant(1, 0.7);
  CHECK(jvp_fd(pend, x, 2.0 * u)(0) == Catch::Approx(2.0 * jvp_fd(pend, x, u)(0)).margin(1e-6));

  // D2f[v,v] for f = -sin x is sin(x) v^2; both the analytic-jvp branch and
  // the pure finite-difference branch must land on it.
  const Vec x2 = Vec::Constant(1, 0.7);
  const Vec v2 = Vec::Constant(1, 1.3);
  const double expected = std::sin(0.7) * 1.3 * 1.3;
  const LangevinModel with_jvp = pendulum(1.0, 1.0, true);
  CHECK(second_directional(with_jvp, x2, v2)(0) == Catch::Approx(expected).epsilon(1e-8));
  CHECK(second_directional(pend, x2, v2)(0) == Catch::Approx(expected).epsilon(1e-5));
  CHECK(second_directional(pend, x2, Vec::Zero(1)).norm() == 0.0);

  // Analytic jvp agrees with the fallback on a grid.
  for (double xi : {-2.0, -0.3, 0.0, 0.9, 2.5}) {
    const Vec xv = Vec::Constant(1, xi);
    CHECK(with_jvp.jvp(xv, u)(0) == Catch::Approx(jvp_fd(pend, xv, u)(0)).margin(1e-6));
  }
}

TEST_CASE("order 1 is Euler-Maruyama; free flight", "[taylor]") {
  const LangevinModel free_flight =
      scalar_model([](const Vec&) { return Vec::Zero(1); }, 0.0, 0.0, false);
  const PhaseState s{Vec::Constant(1, 2.0), Vec::Constant(1, -3.0)};
  const StepIncrements none = StepIncrements::zeros(1, 0.5);
  const PhaseState out = taylor_step(free_flight, s, none, TaylorOrder::one);
  CHECK(out.x(0) == 0.5);
  CHECK(out.v(0) == -3.0);

  const LangevinModel pend = pendulum(0.8, 1.2, true);
  const StepIncrements inc = manual_increments(0.1, 0.03, 0.0, 0.0);
  const PhaseState s2{Vec::Constant(1, 1.0), Vec::Constant(1, 0.5)};
  const PhaseState em = taylor_step(pend, s2, inc, TaylorOrder::one);
  CHECK(em.x(0) == Catch::Approx(1.0 + 0.1 * 0.5).epsilon(1e-15));
  CHECK(em.v(0) ==
        Catch::Approx(0.5 + 0.1 * (-std::sin(1.0) - 0.8 * 0.5) + 1.2 * 0.03).epsilon(1e-15));
}

TEST_CASE("order 2 against the symbolic evaluation oracle", "[taylor]") {
  // Scalar pendulum, x = 1, v = 0, Gamma = sigma = 1, dt = 0.1, dW = 0.05,
  // I_j0 = 0.003.  Evaluating the order-2 expansion by hand:
  //   x' = 1.003 - 0.005 sin 1,  v' = 0.047 - 0.095 sin 1.
  const StepIncrements inc = manual_increments(0.1, 0.05, 0.003, 0.0);
  const PhaseState s{Vec::Ones(1), Vec::Zero(1)};

  const PhaseState with_jvp = taylor_step(pendulum(1.0, 1.0, true), s, inc, TaylorOrder::two);
  CHECK(with_jvp.x(0) == Catch::Approx(0.99879264507596046).epsilon(1e-14));
  CHECK(with_jvp.v(0) == Catch::Approx(-0.032939743556750172).epsilon(1e-12));

  const PhaseState with_fd = taylor_step(pendulum(1.0, 1.0, false), s, inc, TaylorOrder::two);
  CHECK(with_fd.x(0) == Catch::Approx(0.99879264507596046).epsilon(1e-9));
  CHECK(with_fd.v(0) == Catch::Approx(-0.032939743556750172).epsilon(1e-9));
}

TEST_CASE("noise response is exact for a linear force", "[taylor]") {
  // For f = -omega^2 x the scheme's stochastic kernels are exactly
  // A^k B: order 1 adds (0; s) dW, order 2 adds (s; -g s) I_j0, order 3
  // adds (-g s; (g^2 - omega^2) s) I_j00.
  const double omega = 1.3, g = 0.7, s = 0.9;
  const LangevinModel model = harmonic(omega, g, s);
  const PhaseState z0{Vec::Constant(1, 0.4), Vec::Constant(1, -0.2)};
  const double dt = 0.05, dw = 0.21, ij0 = 0.004, ij00 = 0.0007;

  const StepIncrements inc = manual_increments(dt, dw, ij0, ij00);
  const StepIncrements quiet = manual_increments(dt, 0.0, 0.0, 0.0);

  for (TaylorOrder order : {TaylorOrder::one, TaylorOrder::two, TaylorOrder::three}) {
    const PhaseState noisy = taylor_step(model, z0, inc, order);
    const PhaseState det = taylor_step(model, z0, quiet, order);
    double ex = 0.0, ev = s * dw;
    if (order >= TaylorOrder::two) {
      ex += s * ij0;
      ev += -g * s * ij0;
    }
    if (order >= TaylorOrder::three) {
      ex += -g * s * ij00;
      ev += (g * g - omega * omega) * s * ij00;
    }
    CHECK(noisy.x(0) - det.x(0) == Catch::Approx(ex).margin(1e-15));
    CHECK(noisy.v(0) - det.v(0) == Catch::Approx(ev).margin(1e-15));
  }
}

TEST_CASE("deterministic one-step error halves at rate 2^(order+1)", "[taylor]") {
  // sigma = 0, harmonic: compare one step against the exact flow
  // exp(A dt) with A = [[0, 1], [-omega^2, -gamma]].
  const double omega = 1.3, g = 0.7;
  const LangevinModel model = harmonic(omega, g, 0.0);
  Mat a(2, 2);
  a << 0.0, 1.0, -omega * omega, -g;
  const PhaseState z0{Vec::Constant(1, 0.4), Vec::Constant(1, -0.2)};

  const auto one_step_error = [&](double dt, TaylorOrder order) {
    const PhaseState out = taylor_step(model, z0, StepIncrements::zeros(1, dt), order);
    const Mat flow = mat_exp(a * dt);
    Eigen::Vector2d exact = flow * Eigen::Vector2d(z0.x(0), z0.v(0));
    return std::hypot(out.x(0) - exact(0), out.v(0) - exact(1));
  };

  for (int order = 1; order <= 3; ++order) {
    const auto o = static_cast<TaylorOrder>(order);
    const double e1 = one_step_error(0.02, o);
    const double e2 = one_step_error(0.01, o);
    const double rate = std::log2(e1 / e2);
    CHECK(rate == Catch::Approx(order + 1.0).margin(0.1));
  }
}

TEST_CASE("noise-free order 3 equals the hand-written Taylor step", "[taylor]") {
  const double g = 0.8;
  const LangevinModel pend = pendulum(g, 0.0, true);
  const double x = 0.9, v = -0.6, dt = 0.07;
  const PhaseState s{Vec::Constant(1, x), Vec::Constant(1, v)};
  const PhaseState out = taylor_step(pend, s, StepIncrements::zeros(1, dt), TaylorOrder::three);

  const double f = -std::sin(x);
  const double dfv = -std::cos(x) * v;
  const double d2fvv = std::sin(x) * v * v;
  const double a1 = f - g * v;                                   // v drift
  const double a2 = dfv - g * f + g * g * v;                     // L0 of the v drift
  const double a3 = d2fvv - g * dfv + (-std::cos(x) + g * g) * a1;
  const double ex = x + v * dt + a1 * dt * dt / 2.0 + a2 * dt * dt * dt / 6.0;
  const double ev = v + a1 * dt + a2 * dt * dt / 2.0 + a3 * dt * dt * dt / 6.0;
  CHECK(out.x(0) == Catch::Approx(ex).epsilon(1e-13));
  CHECK(out.v(0) == Catch::Approx(ev).epsilon(1e-12));
}

TEST_CASE("increment requirements are enforced", "[taylor]") {
  const LangevinModel pend = pendulum(1.0, 1.0, true);
  const PhaseState s{Vec::Ones(1), Vec::Zero(1)};

  StepIncrements bare;
  bare.dt = 0.1;
  bare.dW = Vec::Constant(1, 0.01);
  bare.I_j0 = bare.I_0j = bare.dU = bare.dV = bare.I_j00 = bare.I_0j0 = Vec::Zero(1);
  CHECK_NOTHROW(taylor_step(pend, s, bare, TaylorOrder::one));
  CHECK_THROWS_AS(taylor_step(pend, s, bare, TaylorOrder::two), ConfigError);

  StepIncrements with_area = bare;
  with_area.has_area = with_area.has_bracket = true;
  CHECK_NOTHROW(taylor_step(pend, s, with_area, TaylorOrder::two));
  CHECK_THROWS_AS(taylor_step(pend, s, with_area, TaylorOrder::three), ConfigError);

  const StepIncrements wrong_dim = StepIncrements::zeros(2, 0.1);
  CHECK_THROWS_AS(taylor_step(pend, s, wrong_dim, TaylorOrder::one), ConfigError);

  const LangevinModel bad =
      scalar_model([](const Vec&) { return Vec::Constant(1, std::nan("")); }, 1.0, 1.0, false);
  CHECK_THROWS_AS(taylor_step(bad, s, bare, TaylorOrder::one), NumericalError);
}
