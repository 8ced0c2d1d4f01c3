#pragma once
// Shared domain types for the Langevin integrator library.
//
// The model integrated everywhere in this library is the second-order
// Langevin equation with additive noise,
//
//     x'(t) = v(t)
//     v'(t) = f(x(t)) - Gamma v(t) + sigma W'(t),
//
// with constant friction matrix Gamma and constant noise amplitude sigma,
// state (x, v) in R^{2n}, and W an n-dimensional standard Wiener process.

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

namespace lgv {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Invalid configuration or arguments. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure at run time (non-finite state, particle collision,
/// degenerate statistics). The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Position/velocity pair: the full state of one realization.
struct PhaseState {
  Vec x;
  Vec v;

  int dim() const { return static_cast<int>(x.size()); }
  bool finite() const { return x.allFinite() && v.allFinite(); }
};

/// A Langevin system: dimension, conservative force, constant Gamma/sigma,
/// optional analytic Jacobian-vector product, and run defaults.
struct LangevinModel {
  std::string name;
  int n = 0;
  Mat gamma;  // n x n friction matrix, constant over a run
  Mat sigma;  // n x n noise amplitude, constant over a run
  std::function<Vec(const Vec&)> force;
  // Directional derivative u -> Df(x) u. May be empty; schemes that need it
  // then fall back to the finite-difference product (jvp_fd).
  std::function<Vec(const Vec&, const Vec&)> jvp;
  PhaseState init;
  // Optional diagnostic: total energy of a state (kinetic + potential).
  std::function<double(const PhaseState&)> energy;
};

inline void check_square(const Mat& m, const char* what) {
  if (m.rows() != m.cols()) throw ConfigError(std::string(what) + ": square matrix required");
}

inline void check_finite(const Mat& m, const char* what) {
  if (!m.allFinite()) throw NumericalError(std::string(what) + ": non-finite input");
}

}  // namespace lgv
