#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "fovlab/eigen_general.hpp"
#include "fovlab/ensembles.hpp"
#include "fovlab/error.hpp"
#include "fovlab/lanczos.hpp"
#include "fovlab/matrix.hpp"
#include "fovlab/parallel.hpp"
#include "fovlab/rng.hpp"
#include "fovlab/stats.hpp"

namespace fovlab {

/// Relative Lanczos tolerance for process statistics: far below the
/// N^{-2/3} fluctuation scale at every supported N.
inline constexpr double process_tol = 1e-10;

/// sqrt(2) lambda_1(H(e^{i theta} A)), the edge-at-2 convention.
inline double scaled_lambda1(const ComplexMatrix& a, double theta, RngStream rng) {
  const auto p = top_eigenpair(hermitian_part(a, theta), process_tol, rng);
  return std::numbers::sqrt2 * p.value;
}

struct Lambda1Curve {
  std::size_t n = 0;
  std::vector<double> thetas;
  std::vector<double> values;
  std::vector<double> residuals;  // on the same scale as values
  double op_norm = 0.0;

  /// |v[k+1] - v[k]| <= sqrt(2) ||A||op |dtheta| + 2 residual.
  bool lipschitz_ok() const {
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
      const double bound = std::numbers::sqrt2 * op_norm * (thetas[k + 1] - thetas[k]) +
                           residuals[k] + residuals[k + 1] + 1e-12 * (1.0 + op_norm);
      if (std::abs(values[k + 1] - values[k]) > bound) return false;
    }
    return true;
  }
};

inline Lambda1Curve lambda1_curve(const ComplexMatrix& a, std::span<const double> thetas) {
  require(std::is_sorted(thetas.begin(), thetas.end()), "thetas must be sorted");
  for (double t : thetas) require(std::isfinite(t) && t >= 0.0 && t < 2.0 * std::numbers::pi, "thetas must lie in [0, 2 pi)");
  Lambda1Curve c;
  c.n = a.n();
  c.thetas.assign(thetas.begin(), thetas.end());
  c.op_norm = operator_norm_bounds(a).upper;
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    RngStream rng(0x637572766555ULL, k);
    const auto p = top_eigenpair(hermitian_part(a, thetas[k]), process_tol, rng);
    c.values.push_back(std::numbers::sqrt2 * p.value);
    c.residuals.push_back(std::numbers::sqrt2 * p.residual);
  }
  return c;
}

inline std::vector<double> uniform_thetas(std::size_t count) {
  require(count >= 1, "theta grid needs at least one point");
  std::vector<double> t(count);
  for (std::size_t k = 0; k < count; ++k)
    t[k] = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
  return t;
}

// Trial streams: one per (seed, trial), tagged by N so scans over N stay independent.
inline RngStream trial_stream(std::uint64_t seed, std::size_t trial, std::size_t n, std::uint64_t tag = 0) {
  return RngStream(seed, trial).split((static_cast<std::uint64_t>(n) << 8) ^ tag);
}

struct PairCorrelation {
  std::size_t n = 0;
  double theta0 = 0.0;
  std::size_t trials = 0;
  std::vector<double> deltas;
  std::vector<double> correlation;  // NaN when a sample is degenerate
  std::vector<double> sync_median;  // median |lambda(theta0) - lambda(theta0 + delta)| N^{2/3}
  std::vector<double> base;         // lambda_1(theta0) per trial
  std::vector<std::vector<double>> shifted;  // [delta][trial]
};

inline PairCorrelation pair_correlation(const EnsembleSpec& spec, double theta0,
                                        std::span<const double> deltas, std::size_t trials,
                                        std::uint64_t seed, std::size_t threads = 1) {
  spec.validate();
  require(trials >= 30, "pair_correlation needs at least 30 trials");
  require(!deltas.empty(), "pair_correlation needs at least one delta");
  require(std::isfinite(theta0), "theta0 must be finite");
  for (double d : deltas) require(std::isfinite(d), "deltas must be finite");

  const std::size_t nd = deltas.size();
  const auto rows = parallel_map(trials, threads, [&](std::size_t t) {
    RngStream rng = trial_stream(seed, t, spec.n);
    const auto a = sample(spec, rng);
    std::vector<double> v(nd + 1);
    v[0] = scaled_lambda1(a, theta0, rng.split(1000));
    for (std::size_t k = 0; k < nd; ++k)
      v[k + 1] = deltas[k] == 0.0 ? v[0] : scaled_lambda1(a, theta0 + deltas[k], rng.split(1001 + k));
    return v;
  });

  PairCorrelation pc;
  pc.n = spec.n;
  pc.theta0 = theta0;
  pc.trials = trials;
  pc.deltas.assign(deltas.begin(), deltas.end());
  pc.base.resize(trials);
  for (std::size_t t = 0; t < trials; ++t) pc.base[t] = rows[t][0];
  const double scale = std::pow(static_cast<double>(spec.n), 2.0 / 3.0);
  for (std::size_t k = 0; k < nd; ++k) {
    std::vector<double> y(trials), dif(trials);
    for (std::size_t t = 0; t < trials; ++t) {
      y[t] = rows[t][k + 1];
      dif[t] = std::abs(y[t] - pc.base[t]) * scale;
    }
    pc.correlation.push_back(deltas[k] == 0.0 && variance(pc.base) > 0.0 ? 1.0 : pearson(pc.base, y));
    pc.sync_median.push_back(median(dif));
    pc.shifted.push_back(std::move(y));
  }
  return pc;
}

/// Log-spaced rescaled separations s = delta N^{1/6} in [0.03, 3].
inline std::vector<double> transition_grid(std::size_t points = 9) {
  require(points >= 2, "transition grid needs at least two points");
  std::vector<double> s(points);
  const double lo = std::log(0.03), hi = std::log(3.0);
  for (std::size_t k = 0; k < points; ++k)
    s[k] = std::exp(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1));
  return s;
}

struct TransitionRow {
  std::size_t n = 0;
  double scaled_delta = 0.0;
  double delta = 0.0;
  double correlation = 0.0;
  double sync_median = 0.0;
};

struct TransitionScan {
  std::vector<TransitionRow> rows;
  std::vector<std::size_t> n_list;
  std::vector<double> spearman;  // per N, correlation vs scaled delta
};

inline TransitionScan transition_scan(const EnsembleSpec& spec, double theta0,
                                      std::span<const std::size_t> n_list, std::size_t trials,
                                      std::uint64_t seed, std::size_t threads = 1,
                                      std::size_t points = 9) {
  require(!n_list.empty(), "transition_scan needs at least one N");
  const auto grid = transition_grid(points);
  TransitionScan ts;
  for (std::size_t n : n_list) {
    EnsembleSpec s = spec;
    s.n = n;
    const double shrink = std::pow(static_cast<double>(n), -1.0 / 6.0);
    std::vector<double> deltas;
    for (double g : grid) deltas.push_back(g * shrink);
    const auto pc = pair_correlation(s, theta0, deltas, trials, seed, threads);
    for (std::size_t k = 0; k < grid.size(); ++k)
      ts.rows.push_back({n, grid[k], deltas[k], pc.correlation[k], pc.sync_median[k]});
    ts.n_list.push_back(n);
    ts.spearman.push_back(spearman(grid, pc.correlation));
  }
  return ts;
}

enum class TailSide { right, left };

inline TailSide parse_tail_side(std::string_view s) {
  if (s == "right") return TailSide::right;
  if (s == "left") return TailSide::left;
  throw ValidationError("tail side must be 'right' or 'left', got '" + std::string(s) + "'");
}

inline std::string_view tail_side_name(TailSide s) { return s == TailSide::right ? "right" : "left"; }

/// Planning exponent: (4/3) x^{3/2} on the right, x^3 / 12 on the left.
inline double tail_exponent(TailSide side, double x) {
  return side == TailSide::right ? (4.0 / 3.0) * std::pow(x, 1.5) : x * x * x / 12.0;
}

inline constexpr double tail_window_k = 2.0;

/// Validity window 1 <= x <= K (log N)^{2/3} (right) or K (log N)^{1/3} (left).
inline bool in_tail_window(TailSide side, double x, std::size_t n) {
  const double ln = std::log(static_cast<double>(n));
  const double top = tail_window_k * std::pow(ln, side == TailSide::right ? 2.0 / 3.0 : 1.0 / 3.0);
  return x >= 1.0 && x <= top;
}

struct TailConfig {
  TailSide side = TailSide::right;
  std::vector<double> x_grid;
  std::size_t n = 256;
  std::size_t trials = 20000;
  double theta0 = 0.0;
  Family family = Family::ginibre_complex;

  void validate() const {
    require(n >= 2, "tail n must be at least 2");
    require(!x_grid.empty(), "tail x grid is empty");
    for (double x : x_grid) {
      require(std::isfinite(x) && x > 0.0, "tail x values must be positive");
      const double planned = static_cast<double>(trials) * std::exp(-tail_exponent(side, x));
      require(planned >= 20.0, "trials too few: planned count at x=" + std::to_string(x) + " is " +
                                   std::to_string(planned) + " < 20");
    }
  }
};

struct TailPoint {
  double x = 0.0;
  std::size_t count = 0;
  double p_hat = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double ratio = 0.0;  // -log p_hat / exponent; NaN when count == 0
  bool zero_count = false;
  bool in_window = true;
};

struct TailEstimate {
  TailConfig config;
  std::vector<TailPoint> points;
};

/// N^{2/3} (lambda_1(theta0) - 2) per trial, in trial order.
inline std::vector<double> edge_samples(Family family, std::size_t n, double theta0,
                                        std::size_t trials, std::uint64_t seed,
                                        std::size_t threads = 1) {
  EnsembleSpec spec{family, n, std::nullopt};
  spec.validate();
  const double scale = std::pow(static_cast<double>(n), 2.0 / 3.0);
  return parallel_map(trials, threads, [&](std::size_t t) {
    RngStream rng = trial_stream(seed, t, n, 0x7461696CULL);
    const auto a = sample(spec, rng);
    return scale * (scaled_lambda1(a, theta0, rng.split(1000)) - 2.0);
  });
}

inline TailEstimate tail_from_samples(const TailConfig& cfg, std::span<const double> samples) {
  require(samples.size() == cfg.trials, "sample count does not match trials");
  TailEstimate te;
  te.config = cfg;
  for (double x : cfg.x_grid) {
    TailPoint p;
    p.x = x;
    for (double s : samples)
      if (cfg.side == TailSide::right ? s >= x : s <= -x) ++p.count;
    p.p_hat = static_cast<double>(p.count) / static_cast<double>(samples.size());
    const auto ci = wilson(p.count, samples.size());
    p.ci_lo = ci.lo;
    p.ci_hi = ci.hi;
    p.zero_count = p.count == 0;
    p.ratio = p.zero_count ? std::numeric_limits<double>::quiet_NaN()
                           : -std::log(p.p_hat) / tail_exponent(cfg.side, x);
    p.in_window = in_tail_window(cfg.side, x, cfg.n);
    te.points.push_back(p);
  }
  return te;
}

inline TailEstimate tail_estimate(const TailConfig& cfg, std::uint64_t seed, std::size_t threads = 1) {
  cfg.validate();
  const auto s = edge_samples(cfg.family, cfg.n, cfg.theta0, cfg.trials, seed, threads);
  return tail_from_samples(cfg, s);
}

/// P(F & F') / (P(F) P(F')) for the events {N^{2/3}(lambda_1 - 2) >= x}
/// (right) or <= -x (left) at theta0 and theta0 + delta. NaN when a
/// marginal count is zero.
struct ProductForm {
  std::size_t joint = 0, first = 0, second = 0, trials = 0;
  double ratio = 0.0;
};

inline ProductForm product_form(std::span<const double> a, std::span<const double> b, TailSide side, double x) {
  require(a.size() == b.size() && !a.empty(), "product_form needs paired samples");
  ProductForm pf;
  pf.trials = a.size();
  auto hit = [&](double s) { return side == TailSide::right ? s >= x : s <= -x; };
  for (std::size_t t = 0; t < a.size(); ++t) {
    const bool ha = hit(a[t]), hb = hit(b[t]);
    pf.first += ha;
    pf.second += hb;
    pf.joint += ha && hb;
  }
  const double n = static_cast<double>(pf.trials);
  if (pf.first == 0 || pf.second == 0) {
    pf.ratio = std::numeric_limits<double>::quiet_NaN();
  } else {
    pf.ratio = (static_cast<double>(pf.joint) / n) /
               ((static_cast<double>(pf.first) / n) * (static_cast<double>(pf.second) / n));
  }
  return pf;
}

/// Semicircle Stieltjes transform: the root of m^2 + z m + 1 = 0 with Im m > 0.
inline cplx msc(cplx z) {
  if (!(z.imag() > 0.0)) throw DomainError("msc requires Im z > 0");
  const cplx s = std::sqrt(z * z - 4.0);
  // The roots multiply to 1; take the larger one without cancellation.
  const cplx r1 = 0.5 * (-z + s), r2 = 0.5 * (-z - s);
  const cplx big = std::abs(r1) >= std::abs(r2) ? r1 : r2;
  const cplx small = 1.0 / big;
  cplx m = big.imag() > 0.0 ? big : small;
  // One Newton step on the defining quadratic.
  const cplx f = m * m + z * m + 1.0;
  const cplx df = 2.0 * m + z;
  if (std::abs(df) > 0.0) {
    const cplx refined = m - f / df;
    if (refined.imag() > 0.0) m = refined;
  }
  return m;
}

}  // namespace fovlab
