#pragma once
// Exact joint law, sampling, and pathwise extraction of the OU stochastic
// integrals consumed by the direct-splitting B-flow and by SVV:
//
//   J1  = ∫_0^dt e^{-Gamma(dt-s)} sigma dW_s
//   J10 = ∫_0^dt ∫_0^t e^{-Gamma(t-s)} sigma dW_s dt
//       = ∫_0^dt (dt-s) phi1(-Gamma(dt-s)) sigma dW_s.
//
// Both are Wiener integrals of smooth matrix kernels, so their joint
// covariance is the Gram matrix of the kernels and exact sampling is a
// Cholesky draw.

#include "lgv/brownian.hpp"
#include "lgv/linalg.hpp"
#include "lgv/quadrature.hpp"
#include "lgv/rng.hpp"
#include "lgv/types.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace lgv {

struct OuPair {
  Vec J1;
  Vec J10;
};

/// Joint covariance of (J1, J10), ordered J1 first, as a 2n x 2n matrix.
/// Computed by composite Gauss-Legendre quadrature of the kernel products;
/// the panel count scales with ||Gamma|| dt so accuracy stays ~1e-12
/// relative across the step sizes the schemes use.
inline Mat ou_integral_covariance(const Mat& gamma, const Mat& sigma, double dt) {
  check_square(gamma, "ou_integral_covariance");
  check_square(sigma, "ou_integral_covariance");
  if (gamma.rows() != sigma.rows())
    throw ConfigError("ou_integral_covariance: gamma/sigma dimension mismatch");
  if (!(dt > 0.0)) throw ConfigError("ou_integral_covariance: dt must be positive");
  const auto n = gamma.rows();

  const auto kernels = [&](double s) {
    const Mat e = mat_exp(-gamma * (dt - s)) * sigma;
    const Mat k = (dt - s) * phi1(-gamma * (dt - s)) * sigma;
    Mat block(2 * n, 2 * n);
    block.topLeftCorner(n, n) = e * e.transpose();
    block.topRightCorner(n, n) = e * k.transpose();
    block.bottomLeftCorner(n, n) = k * e.transpose();
    block.bottomRightCorner(n, n) = k * k.transpose();
    return block;
  };
  const int panels = std::max(1, static_cast<int>(std::ceil(inf_norm(gamma) * dt / 2.0)));
  Mat c = composite_gauss_legendre(kernels, 0.0, dt, panels);
  return (c + c.transpose()) / 2.0;
}

/// Draws (J1, J10) pairs with the exact joint law. The covariance is
/// standardized by its diagonal before factoring so that strongly
/// different scales across the two integrals stay well conditioned.
class OuSampler {
 public:
  OuSampler(const Mat& gamma, const Mat& sigma, double dt)
      : n_(static_cast<int>(gamma.rows())), cov_(ou_integral_covariance(gamma, sigma, dt)) {
    const auto k = cov_.rows();
    Vec d = cov_.diagonal().cwiseMax(0.0).cwiseSqrt();
    Mat corr = Mat::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j)
        if (d(i) > 0.0 && d(j) > 0.0) corr(i, j) = cov_(i, j) / (d(i) * d(j));
    factor_ = d.asDiagonal() * cholesky(corr, 1e-10);
  }

  /// Consumes the 2n normals (step, first_draw .. first_draw + 2n - 1).
  OuPair draw(const RngStream& stream, std::uint64_t step, std::uint32_t first_draw = 0) const {
    Vec z(2 * n_);
    for (int i = 0; i < 2 * n_; ++i)
      z(i) = stream.normal(step, first_draw + static_cast<std::uint32_t>(i));
    const Vec y = factor_ * z;
    return {y.head(n_), y.tail(n_)};
  }

  const Mat& covariance() const { return cov_; }

 private:
  int n_;
  Mat cov_;
  Mat factor_;
};

/// Extracts (J1, J10) over coarse windows of a fine path.
///
/// Integration by parts turns both integrals into smooth ds-quadratures of
/// the windowed path Wt(s) = W(t0+s) - W(t0):
///
///   J10 = ∫_0^dt e^{-Gamma(dt-s)} sigma Wt(s) ds     (Simpson)
///   J1  = sigma dW - Gamma J10                        (exact identity)
///
/// The node kernels e^{-Gamma(dt - i delta)} sigma depend only on
/// (Gamma, sigma, dt, delta) and are precomputed once.
class OuWindowKernels {
 public:
  OuWindowKernels(const Mat& gamma, const Mat& sigma, double dt, double delta)
      : gamma_(gamma), sigma_(sigma), dt_(dt), delta_(delta) {
    check_square(gamma, "OuWindowKernels");
    check_square(sigma, "OuWindowKernels");
    const double rd = dt / delta;
    r_ = static_cast<std::int64_t>(std::llround(rd));
    if (r_ < 2 || std::abs(rd - static_cast<double>(r_)) > 1e-9 * rd || r_ % 2 != 0)
      throw ConfigError("OuWindowKernels: dt must be an even multiple of delta");
    const Mat step = mat_exp(-gamma * delta);
    node_.resize(static_cast<std::size_t>(r_) + 1);
    node_[static_cast<std::size_t>(r_)] = sigma;
    for (std::int64_t i = r_ - 1; i >= 0; --i)
      node_[static_cast<std::size_t>(i)] = step * node_[static_cast<std::size_t>(i + 1)];
  }

  OuPair extract(const BrownianPath& path, std::int64_t k) const {
    if (path.n != gamma_.rows()) throw ConfigError("OuWindowKernels: path dimension mismatch");
    const std::int64_t r = detail::window_ratio(path, k, dt_);
    if (r != r_) throw ConfigError("OuWindowKernels: path spacing changed");
    const std::int64_t base = k * r_;
    Vec acc = Vec::Zero(path.n);
    for (std::int64_t i = 1; i <= r_; ++i) {
      const double c = simpson_coeff(i, r_);
      acc += c * (node_[static_cast<std::size_t>(i)] *
                  (path.W.row(base + i) - path.W.row(base)).transpose());
    }
    OuPair out;
    out.J10 = (delta_ / 3.0) * acc;
    const Vec dw = (path.W.row(base + r_) - path.W.row(base)).transpose();
    out.J1 = sigma_ * dw - gamma_ * out.J10;
    return out;
  }

  double dt() const { return dt_; }

 private:
  Mat gamma_, sigma_;
  double dt_, delta_;
  std::int64_t r_ = 0;
  std::vector<Mat> node_;
};

}  // namespace lgv
