#pragma once
// Fine-grid Brownian paths and Simpson-rule extraction of the multiple Ito
// integrals over coarse windows. One fine path drives both the reference
// solution and every coarse scheme, which is what makes the strong error a
// pathwise quantity.

#include "lgv/increments.hpp"
#include "lgv/quadrature.hpp"
#include "lgv/rng.hpp"
#include "lgv/types.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

namespace lgv {

/// Cumulative Brownian values on a uniform grid of spacing delta.
/// Reconstructible bit-exactly from (seed, path_index, n, delta, m).
struct BrownianPath {
  int n = 0;
  double delta = 0.0;
  std::int64_t m = 0;  // number of fine steps; W has m+1 rows
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
  Eigen::MatrixXd W;  // (m+1) x n, W.row(0) = 0

  double length() const { return delta * static_cast<double>(m); }
};

inline BrownianPath generate_path(int n, double T, double delta, std::uint64_t seed,
                                  std::uint64_t path_index = 0) {
  if (n <= 0) throw ConfigError("generate_path: n must be positive");
  if (!(delta > 0.0) || !(T > 0.0)) throw ConfigError("generate_path: T and delta must be positive");
  const double md = T / delta;
  const auto m = static_cast<std::int64_t>(std::llround(md));
  if (m < 1 || std::abs(md - static_cast<double>(m)) > 1e-9)
    throw ConfigError("generate_path: T must be an integer multiple of delta");

  BrownianPath path;
  path.n = n;
  path.delta = delta;
  path.m = m;
  path.seed = seed;
  path.path_index = path_index;
  path.W.setZero(m + 1, n);

  const RngStream stream(seed, path_index);
  const double sq = std::sqrt(delta);
  Vec z(n);
  for (std::int64_t i = 0; i < m; ++i) {
    stream.fill_normals(static_cast<std::uint64_t>(i), n, z.data());
    path.W.row(i + 1) = path.W.row(i) + sq * z.transpose();
  }
  return path;
}

namespace detail {

inline std::int64_t window_ratio(const BrownianPath& path, std::int64_t k, double dt) {
  const double rd = dt / path.delta;
  const auto r = static_cast<std::int64_t>(std::llround(rd));
  if (r < 1 || std::abs(rd - static_cast<double>(r)) > 1e-9 * rd)
    throw ConfigError("window_ratio: dt is not a multiple of the path spacing");
  if (k < 0 || (k + 1) * r > path.m) throw ConfigError("window_ratio: window outside the path");
  return r;
}

}  // namespace detail

/// Extract the increments of coarse window k (covering [k dt, (k+1) dt])
/// from a fine path.
///
/// dW is read exactly off the endpoints. The time integrals reduce, by
/// Fubini / integration by parts, to single ds-integrals of the windowed
/// path Wt(s) = W(t0+s) - W(t0) against polynomial weights:
///
///   I_(j,0)   = ∫ Wt ds       I_(j,0,0) = ∫ (dt-s) Wt ds
///   I_(0,j,0) = ∫ (2s-dt) Wt ds
///
/// evaluated by composite Simpson; I_(0,j) = dt dW - I_(j,0) enforces the
/// integration-by-parts identity exactly. A ratio of 1 yields only dW.
inline StepIncrements integrals_from_path(const BrownianPath& path, std::int64_t k, double dt) {
  const std::int64_t r = detail::window_ratio(path, k, dt);
  const std::int64_t base = k * r;

  StepIncrements inc;
  inc.dt = dt;
  inc.dW = (path.W.row(base + r) - path.W.row(base)).transpose();
  if (r == 1) return inc;
  if (r % 2 != 0) throw ConfigError("integrals_from_path: even fine-step count required");

  const double delta = path.delta;
  Eigen::RowVectorXd a0 = Eigen::RowVectorXd::Zero(path.n);
  Eigen::RowVectorXd a1 = a0, a2 = a0;
  for (std::int64_t i = 1; i <= r; ++i) {
    const double c = simpson_coeff(i, r);
    const double s = static_cast<double>(i) * delta;
    const Eigen::RowVectorXd wt = path.W.row(base + i) - path.W.row(base);
    a0 += c * wt;
    a1 += (c * (dt - s)) * wt;
    a2 += (c * (2.0 * s - dt)) * wt;
  }
  inc.I_j0 = (delta / 3.0) * a0.transpose();
  inc.I_j00 = (delta / 3.0) * a1.transpose();
  inc.I_0j0 = (delta / 3.0) * a2.transpose();
  inc.I_0j = dt * inc.dW - inc.I_j0;
  inc.dU = inc.I_0j - (dt / 2.0) * inc.dW;
  inc.dV = (inc.I_0j0 - inc.I_j00 - dt * inc.dU) / 9.0;
  inc.has_area = inc.has_bracket = inc.has_triple = true;
  return inc;
}

// Binary path files, little-endian:
//   bytes 0..7   magic "LGVPATH1"
//   u32 n, u32 reserved (zero)
//   f64 delta, u64 m, u64 seed, u64 path_index
//   (m+1)*n f64 cumulative values, row-major.
static_assert(std::endian::native == std::endian::little,
              "path files are little-endian; big-endian hosts are unsupported");

inline void dump_path(const BrownianPath& path, const std::string& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("dump_path: cannot open " + file);
  const char magic[8] = {'L', 'G', 'V', 'P', 'A', 'T', 'H', '1'};
  out.write(magic, 8);
  const std::uint32_t n32 = static_cast<std::uint32_t>(path.n), zero = 0;
  out.write(reinterpret_cast<const char*>(&n32), 4);
  out.write(reinterpret_cast<const char*>(&zero), 4);
  out.write(reinterpret_cast<const char*>(&path.delta), 8);
  const std::uint64_t m64 = static_cast<std::uint64_t>(path.m);
  out.write(reinterpret_cast<const char*>(&m64), 8);
  out.write(reinterpret_cast<const char*>(&path.seed), 8);
  out.write(reinterpret_cast<const char*>(&path.path_index), 8);
  for (std::int64_t i = 0; i <= path.m; ++i)
    for (int j = 0; j < path.n; ++j) {
      const double v = path.W(i, j);
      out.write(reinterpret_cast<const char*>(&v), 8);
    }
  if (!out) throw NumericalError("dump_path: write failed for " + file);
}

inline BrownianPath load_path(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("load_path: cannot open " + file);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, "LGVPATH1", 8) != 0)
    throw ConfigError("load_path: bad magic in " + file);
  std::uint32_t n32 = 0, reserved = 0;
  std::uint64_t m64 = 0;
  BrownianPath path;
  in.read(reinterpret_cast<char*>(&n32), 4);
  in.read(reinterpret_cast<char*>(&reserved), 4);
  in.read(reinterpret_cast<char*>(&path.delta), 8);
  in.read(reinterpret_cast<char*>(&m64), 8);
  in.read(reinterpret_cast<char*>(&path.seed), 8);
  in.read(reinterpret_cast<char*>(&path.path_index), 8);
  if (!in || n32 == 0 || m64 == 0) throw ConfigError("load_path: bad header in " + file);
  path.n = static_cast<int>(n32);
  path.m = static_cast<std::int64_t>(m64);
  path.W.resize(path.m + 1, path.n);
  for (std::int64_t i = 0; i <= path.m; ++i)
    for (int j = 0; j < path.n; ++j) {
      double v = 0.0;
      in.read(reinterpret_cast<char*>(&v), 8);
      path.W(i, j) = v;
    }
  if (!in) throw ConfigError("load_path: truncated payload in " + file);
  return path;
}

}  // namespace lgv
