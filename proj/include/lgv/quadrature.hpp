#pragma once
// Deterministic quadrature helpers: Gauss-Legendre rules (used for the
// kernel-product covariance integrals) and composite Simpson weights (used
// when extracting integrals from a fine Brownian path).

#include "lgv/types.hpp"

#include <cmath>
#include <vector>

namespace lgv {

/// Nodes and weights of the k-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> x;
  std::vector<double> w;
};

/// Compute the k-point rule by Newton iteration on the Legendre polynomial.
/// Exact for polynomials of degree 2k-1; nodes accurate to ~1e-15.
inline GaussLegendre gauss_legendre(int k) {
  if (k < 1) throw ConfigError("gauss_legendre: need at least one node");
  GaussLegendre rule;
  rule.x.resize(k);
  rule.w.resize(k);
  for (int i = 0; i < (k + 1) / 2; ++i) {
    // Chebyshev-like initial guess, then Newton on P_k(x) = 0.
    double x = std::cos(M_PI * (i + 0.75) / (k + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 64; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= k; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = k * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.x[i] = -x;
    rule.x[k - 1 - i] = x;
    rule.w[i] = rule.w[k - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

/// Composite Gauss-Legendre integral of a matrix-valued integrand over
/// [a, b] split into `panels` equal panels with a k-point rule each.
template <class F>
Mat composite_gauss_legendre(const F& f, double a, double b, int panels, int k = 20) {
  if (panels < 1) throw ConfigError("composite_gauss_legendre: need at least one panel");
  const GaussLegendre rule = gauss_legendre(k);
  const double h = (b - a) / panels;
  Mat acc;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (int i = 0; i < k; ++i) {
      const Mat val = f(mid + 0.5 * h * rule.x[i]);
      if (acc.size() == 0) acc = Mat::Zero(val.rows(), val.cols());
      acc += (0.5 * h * rule.w[i]) * val;
    }
  }
  return acc;
}

/// Simpson coefficient for node i of m+1 equally spaced nodes (m even):
/// pattern 1, 4, 2, 4, ..., 2, 4, 1; multiply the sum by (spacing / 3).
inline double simpson_coeff(long i, long m) {
  if (i == 0 || i == m) return 1.0;
  return (i % 2 == 1) ? 4.0 : 2.0;
}

}  // namespace lgv
