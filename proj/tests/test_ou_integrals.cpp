#include "lgv/ou_integrals.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace lgv;

namespace {

double cov_se(double caa, double cbb, double cab, double n) {
  return std::sqrt((caa * cbb + cab * cab) / n);
}

// Closed forms for scalar gamma, sigma:
//   Var(J1)       = s^2 (1 - e^{-2 g dt}) / (2 g)
//   Cov(J1, J10)  = s^2/g [ (1 - e^{-g dt})/g - (1 - e^{-2 g dt})/(2 g) ]
//   Var(J10)      = s^2/g^2 [ dt - 2 (1 - e^{-g dt})/g + (1 - e^{-2 g dt})/(2 g) ]
struct ScalarOu {
  double c11, c12, c22;
  ScalarOu(double g, double s, double dt) {
    const double a = -std::expm1(-g * dt) / g;        // (1 - e^{-g dt}) / g
    const double b = -std::expm1(-2.0 * g * dt) / (2.0 * g);
    c11 = s * s * b;
    c12 = s * s / g * (a - b);
    c22 = s * s / (g * g) * (dt - 2.0 * a + b);
  }
};

}  // namespace

TEST_CASE("ou_integral_covariance closed forms", "[ou]") {
  // gamma = 0: J1 = sigma dW, J10 = int (dt - s) sigma dW.
  {
    const double dt = 0.7;
    Mat gamma = Mat::Zero(2, 2);
    Mat sigma(2, 2);
    sigma << 1.0, 0.25, 0.0, 2.0;
    const Mat c = ou_integral_covariance(gamma, sigma, dt);
    const Mat ss = sigma * sigma.transpose();
    CHECK(inf_norm(c.topLeftCorner(2, 2) - ss * dt) < 1e-13);
    CHECK(inf_norm(c.topRightCorner(2, 2) - ss * dt * dt / 2.0) < 1e-13);
    CHECK(inf_norm(c.bottomRightCorner(2, 2) - ss * dt * dt * dt / 3.0) < 1e-13);
    CHECK(inf_norm(c - c.transpose()) == 0.0);
  }

  // Scalar gamma = sigma = dt = 1 against frozen values.
  {
    Mat gamma(1, 1), sigma(1, 1);
    gamma << 1.0;
    sigma << 1.0;
    const Mat c = ou_integral_covariance(gamma, sigma, 1.0);
    CHECK(c(0, 0) == Catch::Approx(0.43233235838169365).epsilon(1e-12));
    CHECK(c(0, 1) == Catch::Approx(0.19978820044686402).epsilon(1e-12));
    CHECK(c(1, 1) == Catch::Approx(0.16809124072457832).epsilon(1e-12));
  }

  // Commuting diagonal case: each component follows the scalar law.
  {
    const double dt = 0.31;
    Mat gamma = Mat::Zero(2, 2), sigma = Mat::Zero(2, 2);
    gamma.diagonal() << 1.0, 2.0;
    sigma.diagonal() << 0.5, 3.0;
    const Mat c = ou_integral_covariance(gamma, sigma, dt);
    for (int i = 0; i < 2; ++i) {
      const ScalarOu ref(gamma(i, i), sigma(i, i), dt);
      CHECK(c(i, i) == Catch::Approx(ref.c11).epsilon(1e-12));
      CHECK(c(i, 2 + i) == Catch::Approx(ref.c12).epsilon(1e-12));
      CHECK(c(2 + i, 2 + i) == Catch::Approx(ref.c22).epsilon(1e-12));
    }
    CHECK(std::abs(c(0, 1)) < 1e-14);
    CHECK(std::abs(c(0, 3)) < 1e-14);
    CHECK(std::abs(c(2, 3)) < 1e-14);
  }

  // Stiff non-normal gamma: the result must still factor (PSD) and be
  // symmetric; panel subdivision keeps the quadrature honest.
  {
    Mat gamma(2, 2), sigma(2, 2);
    gamma << 8.0, 3.0, 0.0, 12.0;
    sigma << 1.0, 0.0, 0.5, 0.7;
    const Mat c = ou_integral_covariance(gamma, sigma, 1.5);
    CHECK(inf_norm(c - c.transpose()) == 0.0);
    const Mat l = cholesky(c, 1e-10);
    CHECK(inf_norm(l * l.transpose() - c) < 1e-10 * inf_norm(c));
  }

  CHECK_THROWS_AS(ou_integral_covariance(Mat::Zero(2, 2), Mat::Zero(3, 3), 1.0), ConfigError);
  CHECK_THROWS_AS(ou_integral_covariance(Mat::Zero(2, 2), Mat::Zero(2, 2), 0.0), ConfigError);
}

TEST_CASE("OuSampler reproduces its covariance", "[ou][statistical]") {
  Mat gamma(1, 1), sigma(1, 1);
  gamma << 1.0;
  sigma << 1.0;
  const double dt = 0.5;
  const OuSampler sampler(gamma, sigma, dt);
  const Mat& c = sampler.covariance();
  const ScalarOu ref(1.0, 1.0, dt);
  CHECK(c(0, 0) == Catch::Approx(ref.c11).epsilon(1e-12));

  const RngStream stream(606, 0);
  const int n_samples = 200000;
  double aa = 0, ab = 0, bb = 0;
  for (int i = 0; i < n_samples; ++i) {
    const OuPair p = sampler.draw(stream, static_cast<std::uint64_t>(i));
    aa += p.J1(0) * p.J1(0);
    ab += p.J1(0) * p.J10(0);
    bb += p.J10(0) * p.J10(0);
  }
  const double n = n_samples;
  CHECK(std::abs(aa / n - c(0, 0)) < 4.0 * cov_se(c(0, 0), c(0, 0), c(0, 0), n));
  CHECK(std::abs(ab / n - c(0, 1)) < 4.0 * cov_se(c(0, 0), c(1, 1), c(0, 1), n));
  CHECK(std::abs(bb / n - c(1, 1)) < 4.0 * cov_se(c(1, 1), c(1, 1), c(1, 1), n));

  // Addressable and reproducible.
  const OuPair p1 = sampler.draw(stream, 3);
  const OuPair p2 = sampler.draw(stream, 3);
  CHECK(p1.J1(0) == p2.J1(0));
  CHECK(p1.J10(0) == p2.J10(0));
  const OuPair p3 = sampler.draw(stream, 4);
  CHECK(p1.J1(0) != p3.J1(0));
  const OuPair p4 = sampler.draw(stream, 3, 2);
  CHECK(p1.J1(0) != p4.J1(0));
}

TEST_CASE("OuWindowKernels on an injected linear path", "[ou]") {
  // W(t) = t: J10 = sigma [ dt (1 - e^{-g dt})/g - (1 - e^{-g dt}(1 + g dt))/g^2 ]
  // and J1 = sigma (1 - e^{-g dt}) / g.
  const double g = 1.0, s = 2.0, dt = 0.5;
  const std::int64_t r = 64;
  Mat gamma(1, 1), sigma(1, 1);
  gamma << g;
  sigma << s;
  const OuWindowKernels kernels(gamma, sigma, dt, dt / static_cast<double>(r));

  BrownianPath path;
  path.n = 1;
  path.delta = dt / static_cast<double>(r);
  path.m = r;
  path.W.resize(r + 1, 1);
  for (std::int64_t i = 0; i <= r; ++i) path.W(i, 0) = path.delta * static_cast<double>(i);

  const OuPair p = kernels.extract(path, 0);
  const double e = std::exp(-g * dt);
  const double j10 = s * (dt * (1.0 - e) / g - (1.0 - e * (1.0 + g * dt)) / (g * g));
  const double j1 = s * (1.0 - e) / g;
  CHECK(p.J10(0) == Catch::Approx(j10).epsilon(1e-8));
  CHECK(p.J1(0) == Catch::Approx(j1).epsilon(1e-8));
  // The pathwise identity J1 = sigma dW - gamma J10 is exact by construction.
  CHECK(p.J1(0) + g * p.J10(0) == Catch::Approx(s * dt).epsilon(1e-15));

  CHECK_THROWS_AS(OuWindowKernels(gamma, sigma, dt, dt / 3.0), ConfigError);
  BrownianPath wrong = path;
  wrong.delta /= 2.0;
  CHECK_THROWS_AS(kernels.extract(wrong, 0), ConfigError);
}

TEST_CASE("extracted OU integrals match the quadrature covariance", "[ou][statistical]") {
  // Scalar case at ratio 64: path-extracted (J1, J10) second moments against
  // ou_integral_covariance.  This pits the Simpson window reduction against
  // the Gauss-Legendre Gram matrix; they share no code path.
  {
    const double g = 1.3, s = 0.7, dt = 0.25;
    Mat gamma(1, 1), sigma(1, 1);
    gamma << g;
    sigma << s;
    const Mat c = ou_integral_covariance(gamma, sigma, dt);
    const OuWindowKernels kernels(gamma, sigma, dt, dt / 64.0);

    const std::int64_t windows = 1000;
    const int n_paths = 100;
    double aa = 0, ab = 0, bb = 0;
    for (int p = 0; p < n_paths; ++p) {
      const BrownianPath path =
          generate_path(1, windows * dt, dt / 64.0, 2718, static_cast<std::uint64_t>(p));
      for (std::int64_t k = 0; k < windows; ++k) {
        const OuPair pair = kernels.extract(path, k);
        aa += pair.J1(0) * pair.J1(0);
        ab += pair.J1(0) * pair.J10(0);
        bb += pair.J10(0) * pair.J10(0);
      }
    }
    const double n = static_cast<double>(windows * n_paths);
    CHECK(std::abs(aa / n - c(0, 0)) < 4.0 * cov_se(c(0, 0), c(0, 0), c(0, 0), n));
    CHECK(std::abs(ab / n - c(0, 1)) < 4.0 * cov_se(c(0, 0), c(1, 1), c(0, 1), n));
    CHECK(std::abs(bb / n - c(1, 1)) < 4.0 * cov_se(c(1, 1), c(1, 1), c(1, 1), n));
  }

  // Non-commuting matrix case: all ten unique entries of the 4x4 covariance.
  {
    Mat gamma(2, 2), sigma(2, 2);
    gamma << 1.0, 0.5, 0.0, 2.0;
    sigma << 0.8, 0.0, 0.0, 0.8;
    const double dt = 0.4;
    const Mat c = ou_integral_covariance(gamma, sigma, dt);
    const OuWindowKernels kernels(gamma, sigma, dt, dt / 64.0);

    const std::int64_t windows = 1000;
    const int n_paths = 20;
    Mat acc = Mat::Zero(4, 4);
    Vec y(4);
    for (int p = 0; p < n_paths; ++p) {
      const BrownianPath path =
          generate_path(2, windows * dt, dt / 64.0, 3141, static_cast<std::uint64_t>(p));
      for (std::int64_t k = 0; k < windows; ++k) {
        const OuPair pair = kernels.extract(path, k);
        y << pair.J1(0), pair.J1(1), pair.J10(0), pair.J10(1);
        acc += y * y.transpose();
      }
    }
    const double n = static_cast<double>(windows * n_paths);
    for (int i = 0; i < 4; ++i)
      for (int j = i; j < 4; ++j)
        CHECK(std::abs(acc(i, j) / n - c(i, j)) < 4.0 * cov_se(c(i, i), c(j, j), c(i, j), n));
  }
}
