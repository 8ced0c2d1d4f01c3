#pragma once
// Small dense kernels behind the OU sub-flows and increment sampling:
// matrix exponential, the exponential-integrator phi-functions, and a
// Cholesky factorization that tolerates positive semi-definite input.
//
// phi-functions replace every explicit Gamma^{-1} in the velocity updates:
//   phi1(M) = M^{-1}(e^M - I)       phi1(0) = I
//   phi2(M) = M^{-2}(e^M - I - M)   phi2(0) = I/2
// so that Gamma = 0 and negative substep fractions are exact, not special
// cases.

#include "lgv/types.hpp"

#include <cmath>

namespace lgv {

/// Infinity (max row sum) operator norm.
inline double inf_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

/// exp(M) by scaling and squaring with a truncated Taylor evaluation.
/// Relative accuracy ~1e-13 for ||M|| <= 10.
inline Mat mat_exp(const Mat& m) {
  check_square(m, "mat_exp");
  check_finite(m, "mat_exp");
  const auto n = m.rows();
  const double norm = inf_norm(m);

  // Scale until ||M/2^s|| <= 0.25; the Taylor series then converges to
  // machine precision in ~16 terms and squaring error stays benign.
  int squarings = 0;
  if (norm > 0.25) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.25)));
  const Mat a = m / std::ldexp(1.0, squarings);

  Mat result = Mat::Identity(n, n);
  Mat term = Mat::Identity(n, n);
  for (int k = 1; k <= 32; ++k) {
    term = (term * a) / static_cast<double>(k);
    result += term;
    if (inf_norm(term) <= 1e-17 * inf_norm(result)) break;
  }
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

namespace detail {

// Truncated series sum_{k>=0} M^k / (k + shift)!; accurate for small ||M||.
inline Mat phi_series(const Mat& m, int shift) {
  const auto n = m.rows();
  double fact = 1.0;
  for (int i = 2; i <= shift; ++i) fact *= i;
  Mat term = Mat::Identity(n, n) / fact;
  Mat result = term;
  for (int k = 1; k <= 24; ++k) {
    term = (term * m) / static_cast<double>(k + shift);
    result += term;
    if (inf_norm(term) <= 1e-18 * inf_norm(result)) break;
  }
  return result;
}

// Van Loan block augmentation: the top-right n x n block of
//   exp([[M, I, 0], [0, 0, I], [0, 0, 0]])  (depth blocks of the chain)
// equals phi_depth(M). One mat_exp yields the phi-function without ever
// inverting M, so singular M is handled uniformly.
inline Mat phi_block(const Mat& m, int depth) {
  const auto n = m.rows();
  Mat aug = Mat::Zero(n * (depth + 1), n * (depth + 1));
  aug.topLeftCorner(n, n) = m;
  for (int b = 0; b < depth; ++b) aug.block(b * n, (b + 1) * n, n, n) = Mat::Identity(n, n);
  return mat_exp(aug).topRightCorner(n, n);
}

inline Mat phi(const Mat& m, int depth, const char* what) {
  check_square(m, what);
  check_finite(m, what);
  if (inf_norm(m) < 1e-2) return phi_series(m, depth);
  return phi_block(m, depth);
}

}  // namespace detail

/// phi1(M) with M phi1(M) = e^M - I; well-defined for singular M.
inline Mat phi1(const Mat& m) { return detail::phi(m, 1, "phi1"); }

/// phi2(M) with M^2 phi2(M) = e^M - I - M; phi2(0) = I/2.
inline Mat phi2(const Mat& m) { return detail::phi(m, 2, "phi2"); }

/// Lower-triangular L with L L^T = S for symmetric positive semi-definite S.
/// Zero pivots (within rel_tol of the largest diagonal entry) produce zero
/// columns, so exactly rank-deficient covariances factor cleanly; a pivot
/// that is negative beyond tolerance raises NumericalError.
inline Mat cholesky(const Mat& s, double rel_tol = 1e-12) {
  check_square(s, "cholesky");
  check_finite(s, "cholesky");
  const auto n = s.rows();
  if (inf_norm(s - s.transpose()) > 1e-10 * (1.0 + inf_norm(s)))
    throw ConfigError("cholesky: matrix not symmetric");

  const double scale = (n > 0) ? std::max(0.0, s.diagonal().maxCoeff()) : 0.0;
  Mat l = Mat::Zero(n, n);
  if (scale == 0.0) {
    if (inf_norm(s) > rel_tol) throw NumericalError("cholesky: matrix not positive semi-definite");
    return l;
  }
  const double tol = rel_tol * scale;
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = s(j, j) - l.row(j).head(j).squaredNorm();
    if (d > tol) {
      l(j, j) = std::sqrt(d);
      for (Eigen::Index i = j + 1; i < n; ++i)
        l(i, j) = (s(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    } else if (d >= -tol) {
      // Semi-definite pivot: the whole column must be (numerically) zero.
      for (Eigen::Index i = j + 1; i < n; ++i) {
        const double r = s(i, j) - l.row(i).head(j).dot(l.row(j).head(j));
        if (std::abs(r) > std::sqrt(tol * scale))
          throw NumericalError("cholesky: matrix not positive semi-definite");
      }
    } else {
      throw NumericalError("cholesky: matrix not positive semi-definite");
    }
  }
  return l;
}

}  // namespace lgv
