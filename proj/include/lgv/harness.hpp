#pragma once
// Coupled strong-convergence experiments.  One fine Brownian path per
// realization drives an Euler-Maruyama reference and every (scheme, dt)
// under test; terminal-state differences are aggregated across paths and
// the strong order read off a log2-log2 least-squares fit.
//
// Parallelism is path-parallel.  Each path owns its RNG stream and writes
// into its own slot; the final reduction folds the slots in path order, so
// reports are bit-identical for any worker-thread count.

#include "lgv/brownian.hpp"
#include "lgv/increments.hpp"
#include "lgv/models.hpp"
#include "lgv/ou_integrals.hpp"
#include "lgv/splitting.hpp"
#include "lgv/taylor.hpp"
#include "lgv/types.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace lgv {

enum class Scheme {
  taylor1,
  taylor2,
  taylor3,
  trunc1_naive,
  trunc1_sym,
  trunc2_naive,
  trunc2_sym,
  trunc3_neri,
  direct_ab,
  direct_sym,
  svv,
};

inline constexpr std::array<Scheme, 11> kAllSchemes = {
    Scheme::taylor1,      Scheme::taylor2,   Scheme::taylor3,    Scheme::trunc1_naive,
    Scheme::trunc1_sym,   Scheme::trunc2_naive, Scheme::trunc2_sym, Scheme::trunc3_neri,
    Scheme::direct_ab,    Scheme::direct_sym, Scheme::svv,
};

inline const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::taylor1: return "taylor1";
    case Scheme::taylor2: return "taylor2";
    case Scheme::taylor3: return "taylor3";
    case Scheme::trunc1_naive: return "trunc1-naive";
    case Scheme::trunc1_sym: return "trunc1-sym";
    case Scheme::trunc2_naive: return "trunc2-naive";
    case Scheme::trunc2_sym: return "trunc2-sym";
    case Scheme::trunc3_neri: return "trunc3-neri";
    case Scheme::direct_ab: return "direct-ab";
    case Scheme::direct_sym: return "direct-sym";
    case Scheme::svv: return "svv";
  }
  throw ConfigError("scheme_name: unknown scheme");
}

/// Strong order each scheme is expected to exhibit.
inline double claimed_order(Scheme s) {
  switch (s) {
    case Scheme::taylor1:
    case Scheme::trunc1_naive:
    case Scheme::trunc1_sym:
    case Scheme::trunc2_naive:
    case Scheme::direct_ab:
    case Scheme::direct_sym: return 1.0;
    case Scheme::taylor2:
    case Scheme::trunc2_sym:
    case Scheme::svv: return 2.0;
    case Scheme::taylor3:
    case Scheme::trunc3_neri: return 3.0;
  }
  throw ConfigError("claimed_order: unknown scheme");
}

inline Scheme scheme_from_name(const std::string& name) {
  for (Scheme s : kAllSchemes)
    if (name == scheme_name(s)) return s;
  std::string valid;
  for (Scheme s : kAllSchemes) {
    if (!valid.empty()) valid += ", ";
    valid += scheme_name(s);
  }
  throw ConfigError("unknown scheme '" + name + "' (valid: " + valid + ")");
}

/// True for the schemes driven by the exact OU integrals (J1, J10) rather
/// than the polynomial-kernel increments.
inline bool scheme_uses_ou(Scheme s) {
  return s == Scheme::direct_ab || s == Scheme::direct_sym || s == Scheme::svv;
}

/// A full coupled-convergence experiment.
struct ExperimentConfig {
  LangevinModel model;
  std::vector<Scheme> schemes;
  std::vector<double> dts;  // coarse steps
  double ref_dt = 0.0;      // fine (reference) step
  double T = 0.0;
  int n_paths = 0;
  std::uint64_t seed = 0;

  void validate() const {
    if (model.n <= 0 || !model.force) throw ConfigError("experiment: model is not usable");
    if (schemes.empty()) throw ConfigError("experiment: at least one scheme required");
    if (dts.empty()) throw ConfigError("experiment: at least one dt required");
    if (!(T > 0.0) || !(ref_dt > 0.0)) throw ConfigError("experiment: T and ref_dt must be positive");
    if (n_paths < 1) throw ConfigError("experiment: n_paths must be at least 1");
    for (std::size_t i = 0; i < dts.size(); ++i) {
      const double dt = dts[i];
      if (!(dt > 0.0)) throw ConfigError("experiment: dt must be positive");
      for (std::size_t j = i + 1; j < dts.size(); ++j)
        if (dts[j] == dt) throw ConfigError("experiment: duplicate dt in list");
      const double steps = T / dt;
      if (std::abs(steps - std::round(steps)) > 1e-9 * steps)
        throw ConfigError("experiment: T must be an integer multiple of every dt");
      const double ratio = dt / ref_dt;
      const double r = std::round(ratio);
      if (std::abs(ratio - r) > 1e-9 * ratio)
        throw ConfigError("experiment: every dt must be an integer multiple of ref_dt");
      if (r < 16.0)
        throw ConfigError("experiment: dt/ref_dt must be at least 16 (quadrature accuracy floor)");
      if (std::fmod(r, 2.0) != 0.0)
        throw ConfigError("experiment: dt/ref_dt must be even (Simpson windows)");
    }
  }
};

/// Aggregated errors for one (scheme, dt) cell.
struct CellStats {
  double dt = 0.0;
  double mean_error = 0.0;  // mean Euclidean terminal error on (x, v)
  double std_error = std::numeric_limits<double>::quiet_NaN();  // NaN: absent (n_used < 2)
  double mean_error_x = 0.0, std_error_x = std::numeric_limits<double>::quiet_NaN();
  double mean_error_v = 0.0, std_error_v = std::numeric_limits<double>::quiet_NaN();
  int n_used = 0;
  int n_excluded = 0;
  bool unreliable = false;  // > 20% of paths excluded: not averaged into fits
  std::vector<std::pair<std::uint64_t, std::string>> exclusions;  // (path index, reason)
};

struct SchemeResult {
  Scheme scheme = Scheme::taylor1;
  std::vector<CellStats> cells;  // parallel to the config dt list
  bool fitted = false;
  double slope = std::numeric_limits<double>::quiet_NaN();
  double slope_stderr = std::numeric_limits<double>::quiet_NaN();
};

struct ConvergenceReport {
  std::string model_name;
  double T = 0.0;
  double ref_dt = 0.0;
  std::uint64_t seed = 0;
  int n_paths = 0;
  std::vector<double> dts;
  std::vector<SchemeResult> results;
};

/// Least-squares slope of log2(error) against log2(dt), with the residual
/// standard error of the slope.
inline std::pair<double, double> fit_order(const std::vector<double>& dts,
                                           const std::vector<double>& errors) {
  const std::size_t n = dts.size();
  if (n != errors.size()) throw ConfigError("fit_order: length mismatch");
  if (n < 3) throw ConfigError("fit_order: at least 3 points required");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(dts[i] > 0.0) || !(errors[i] > 0.0))
      throw ConfigError("fit_order: dts and errors must be positive");
    for (std::size_t j = i + 1; j < n; ++j)
      if (dts[i] == dts[j]) throw ConfigError("fit_order: degenerate dt list");
  }
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::log2(dts[i]);
    y[i] = std::log2(errors[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double resid = y[i] - (my + slope * (x[i] - mx));
    ssr += resid * resid;
  }
  const double stderr_slope = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
  return {slope, stderr_slope};
}

/// Euler-Maruyama at the path's fine spacing: the "exact" baseline every
/// coarse scheme is coupled against.  Implemented as a chain of order-1
/// Taylor steps so that taylor1 at dt = ref_dt reproduces it bit-exactly.
inline PhaseState run_reference(const LangevinModel& model, const BrownianPath& path) {
  if (path.n != model.n) throw ConfigError("run_reference: path dimension mismatch");
  PhaseState s = model.init;
  StepIncrements inc;
  inc.dt = path.delta;
  for (std::int64_t i = 0; i < path.m; ++i) {
    inc.dW = (path.W.row(i + 1) - path.W.row(i)).transpose();
    s = taylor_step(model, s, inc, TaylorOrder::one);
  }
  return s;
}

/// Terminal state of one scheme at step dt, driven by the same fine path:
/// polynomial-kernel increments (and OU integrals where needed) extracted
/// window by window.
inline PhaseState run_scheme_coupled(const LangevinModel& model, Scheme scheme,
                                     const BrownianPath& path, double dt) {
  if (path.n != model.n) throw ConfigError("run_scheme_coupled: path dimension mismatch");
  const std::int64_t r = detail::window_ratio(path, 0, dt);
  const std::int64_t n_steps = path.m / r;
  if (n_steps * r != path.m)
    throw ConfigError("run_scheme_coupled: horizon is not a whole number of steps");

  PhaseState s = model.init;
  if (scheme_uses_ou(scheme)) {
    const OuWindowKernels kernels(model.gamma, model.sigma, dt, path.delta);
    for (std::int64_t k = 0; k < n_steps; ++k) {
      const OuPair noise = kernels.extract(path, k);
      switch (scheme) {
        case Scheme::direct_ab:
          s = direct_split_step(model, s, dt, noise, DirectVariant::ab);
          break;
        case Scheme::direct_sym:
          s = direct_split_step(model, s, dt, noise, DirectVariant::sym);
          break;
        default:
          s = svv_step(model, s, dt, noise);
          break;
      }
    }
    return s;
  }
  for (std::int64_t k = 0; k < n_steps; ++k) {
    const StepIncrements inc = integrals_from_path(path, k, dt);
    switch (scheme) {
      case Scheme::taylor1: s = taylor_step(model, s, inc, TaylorOrder::one); break;
      case Scheme::taylor2: s = taylor_step(model, s, inc, TaylorOrder::two); break;
      case Scheme::taylor3: s = taylor_step(model, s, inc, TaylorOrder::three); break;
      case Scheme::trunc1_naive:
        s = trunc_step(model, s, inc, Truncation::one, Composition::naive);
        break;
      case Scheme::trunc1_sym:
        s = trunc_step(model, s, inc, Truncation::one, Composition::symmetric);
        break;
      case Scheme::trunc2_naive:
        s = trunc_step(model, s, inc, Truncation::two, Composition::naive);
        break;
      case Scheme::trunc2_sym:
        s = trunc_step(model, s, inc, Truncation::two, Composition::symmetric);
        break;
      case Scheme::trunc3_neri:
        s = trunc_step(model, s, inc, Truncation::three, Composition::neri);
        break;
      default:
        throw ConfigError("run_scheme_coupled: unhandled scheme");
    }
  }
  return s;
}

namespace detail {

struct CellSample {
  bool ok = false;
  double full = 0.0, err_x = 0.0, err_v = 0.0;
  std::string reason;
};

struct PathOutcome {
  std::vector<CellSample> cells;  // scheme-major, dt-minor
};

/// Mean and standard error of the mean (NaN when fewer than two values).
inline std::pair<double, double> mean_and_se(const std::vector<double>& values) {
  const auto n = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(n);
  if (n < 2) return {mean, std::numeric_limits<double>::quiet_NaN()};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n))};
}

}  // namespace detail

/// Runs the full coupled experiment.  n_threads <= 0 picks the hardware
/// concurrency.  Output is independent of the thread count, bit for bit.
inline ConvergenceReport strong_error_experiment(const ExperimentConfig& cfg, int n_threads = 0) {
  cfg.validate();
  const std::size_t n_cells = cfg.schemes.size() * cfg.dts.size();
  std::vector<detail::PathOutcome> outcomes(static_cast<std::size_t>(cfg.n_paths));

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto run_path = [&](int p) {
    detail::PathOutcome out;
    out.cells.resize(n_cells);
    const BrownianPath path = generate_path(cfg.model.n, cfg.T, cfg.ref_dt, cfg.seed,
                                            static_cast<std::uint64_t>(p));
    PhaseState ref;
    bool ref_ok = false;
    std::string ref_reason;
    try {
      ref = run_reference(cfg.model, path);
      ref_ok = true;
    } catch (const NumericalError& e) {
      ref_reason = std::string("reference: ") + e.what();
    }
    std::size_t cell = 0;
    for (Scheme scheme : cfg.schemes) {
      for (double dt : cfg.dts) {
        detail::CellSample& sample = out.cells[cell++];
        if (!ref_ok) {
          sample.reason = ref_reason;
          continue;
        }
        try {
          const PhaseState y = run_scheme_coupled(cfg.model, scheme, path, dt);
          const Vec dx = y.x - ref.x;
          const Vec dv = y.v - ref.v;
          sample.err_x = dx.norm();
          sample.err_v = dv.norm();
          sample.full = std::sqrt(dx.squaredNorm() + dv.squaredNorm());
          sample.ok = true;
        } catch (const NumericalError& e) {
          sample.reason = e.what();
        }
      }
    }
    return out;
  };

  const auto worker = [&] {
    try {
      for (;;) {
        const int p = next.fetch_add(1);
        if (p >= cfg.n_paths) break;
        outcomes[static_cast<std::size_t>(p)] = run_path(p);
      }
    } catch (...) {
      const std::lock_guard<std::mutex> hold(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };

  int threads = n_threads > 0 ? n_threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, cfg.n_paths);
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  ConvergenceReport report;
  report.model_name = cfg.model.name;
  report.T = cfg.T;
  report.ref_dt = cfg.ref_dt;
  report.seed = cfg.seed;
  report.n_paths = cfg.n_paths;
  report.dts = cfg.dts;

  std::size_t cell = 0;
  for (Scheme scheme : cfg.schemes) {
    SchemeResult result;
    result.scheme = scheme;
    for (double dt : cfg.dts) {
      CellStats stats;
      stats.dt = dt;
      std::vector<double> full, ex, ev;
      for (int p = 0; p < cfg.n_paths; ++p) {  // ordered fold: thread-count independent
        const detail::CellSample& sample = outcomes[static_cast<std::size_t>(p)].cells[cell];
        if (sample.ok) {
          full.push_back(sample.full);
          ex.push_back(sample.err_x);
          ev.push_back(sample.err_v);
        } else {
          stats.exclusions.emplace_back(static_cast<std::uint64_t>(p), sample.reason);
        }
      }
      ++cell;
      stats.n_used = static_cast<int>(full.size());
      stats.n_excluded = static_cast<int>(stats.exclusions.size());
      if (stats.n_used == 0)
        throw NumericalError(std::string("strong_error_experiment: every path excluded for ") +
                             scheme_name(scheme) + " at dt=" + std::to_string(dt) +
                             "; first reason: " + stats.exclusions.front().second);
      stats.unreliable = stats.n_excluded * 5 > cfg.n_paths;  // > 20%
      std::tie(stats.mean_error, stats.std_error) = detail::mean_and_se(full);
      std::tie(stats.mean_error_x, stats.std_error_x) = detail::mean_and_se(ex);
      std::tie(stats.mean_error_v, stats.std_error_v) = detail::mean_and_se(ev);
      result.cells.push_back(std::move(stats));
    }

    std::vector<double> fit_dts, fit_errors;
    for (const CellStats& stats : result.cells)
      if (!stats.unreliable && stats.mean_error > 0.0) {
        fit_dts.push_back(stats.dt);
        fit_errors.push_back(stats.mean_error);
      }
    if (fit_dts.size() >= 3) {
      std::tie(result.slope, result.slope_stderr) = fit_order(fit_dts, fit_errors);
      result.fitted = true;
    }
    report.results.push_back(std::move(result));
  }
  return report;
}

}  // namespace lgv
