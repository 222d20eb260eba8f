#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fovlab/error.hpp"
#include "fovlab/matrix.hpp"
#include "fovlab/rng.hpp"

namespace fovlab {

enum class Family { ginibre_complex, gue, elliptic, strict_upper_triangular, bernoulli_phase };

inline std::string_view family_name(Family f) {
  switch (f) {
    case Family::ginibre_complex: return "ginibre_complex";
    case Family::gue: return "gue";
    case Family::elliptic: return "elliptic";
    case Family::strict_upper_triangular: return "strict_upper_triangular";
    case Family::bernoulli_phase: return "bernoulli_phase";
  }
  return "unknown";
}

inline Family parse_family(std::string_view s) {
  if (s == "ginibre_complex" || s == "ginibre" || s == "iid") return Family::ginibre_complex;
  if (s == "gue") return Family::gue;
  if (s == "elliptic") return Family::elliptic;
  if (s == "strict_upper_triangular" || s == "triangular") return Family::strict_upper_triangular;
  if (s == "bernoulli_phase" || s == "bernoulli") return Family::bernoulli_phase;
  throw ValidationError("unknown ensemble family '" + std::string(s) + "'");
}

struct EnsembleSpec {
  Family family = Family::ginibre_complex;
  std::size_t n = 0;
  std::optional<double> gamma;  // present iff family == elliptic

  void validate() const {
    require(n >= 1, "ensemble dimension must be positive");
    if (family == Family::elliptic) {
      require(gamma.has_value(), "elliptic ensemble requires gamma");
      require(*gamma > 0.0 && *gamma <= 1.0, "elliptic gamma must lie in (0, 1]");
    } else {
      require(!gamma.has_value(), "gamma is only meaningful for the elliptic ensemble");
    }
  }

  static EnsembleSpec ginibre(std::size_t n) { return {Family::ginibre_complex, n, std::nullopt}; }
  static EnsembleSpec gue(std::size_t n) { return {Family::gue, n, std::nullopt}; }
  static EnsembleSpec elliptic(std::size_t n, double g) { return {Family::elliptic, n, g}; }
};

namespace detail {

inline std::vector<cplx> ginibre_entries(std::size_t n, RngStream& rng) {
  const double s = 1.0 / std::sqrt(2.0 * static_cast<double>(n));
  std::vector<cplx> d(n * n);
  for (auto& z : d) {
    const double g1 = rng.gaussian();
    const double g2 = rng.gaussian();
    z = {s * g1, s * g2};
  }
  return d;
}

// E|w_ij|^2 = 1/N, real diagonal with variance 1/N.
inline std::vector<cplx> gue_entries(std::size_t n, RngStream& rng) {
  const double nn = static_cast<double>(n);
  const double sd = 1.0 / std::sqrt(nn);
  const double so = 1.0 / std::sqrt(2.0 * nn);
  std::vector<cplx> d(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    d[i * n + i] = sd * rng.gaussian();
    for (std::size_t j = i + 1; j < n; ++j) {
      const double g1 = rng.gaussian();
      const double g2 = rng.gaussian();
      d[i * n + j] = {so * g1, so * g2};
      d[j * n + i] = {so * g1, -so * g2};
    }
  }
  return d;
}

}  // namespace detail

/// One draw from the ensemble. The matrix is a pure function of `spec`
/// and the stream state.
inline ComplexMatrix sample(const EnsembleSpec& spec, RngStream& rng) {
  spec.validate();
  const std::size_t n = spec.n;
  switch (spec.family) {
    case Family::ginibre_complex:
      return {n, detail::ginibre_entries(n, rng)};
    case Family::gue:
      return {n, detail::gue_entries(n, rng)};
    case Family::elliptic: {
      const double g = *spec.gamma;
      // Children keyed on a fresh word so consecutive draws differ.
      const RngStream base = rng.split(rng.next_u64());
      RngStream ws = base.split(1);
      RngStream as = base.split(2);
      auto w = detail::gue_entries(n, ws);
      const auto a = detail::ginibre_entries(n, as);
      const double sw = std::sqrt(g), sa = std::sqrt(1.0 - g);
      for (std::size_t k = 0; k < w.size(); ++k) w[k] = sw * w[k] + sa * a[k];
      return {n, std::move(w)};
    }
    case Family::strict_upper_triangular: {
      const double s = 1.0 / std::sqrt(2.0 * static_cast<double>(n));
      std::vector<cplx> d(n * n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
          const double g1 = rng.gaussian();
          const double g2 = rng.gaussian();
          d[i * n + j] = {s * g1, s * g2};
        }
      return {n, std::move(d)};
    }
    case Family::bernoulli_phase: {
      const double s = 1.0 / std::sqrt(2.0 * static_cast<double>(n));
      std::vector<cplx> d(n * n);
      for (auto& z : d) {
        const double re = rng.coin() ? s : -s;
        const double im = rng.coin() ? s : -s;
        z = {re, im};
      }
      return {n, std::move(d)};
    }
  }
  throw ValidationError("unknown ensemble family");
}

/// Exact stationary OU update on the GUE scale:
/// X' = e^{-s/2} X + sqrt(1 - e^{-s}) G with G a fresh GUE draw.
inline ComplexMatrix ou_update(const ComplexMatrix& x, double s, RngStream& rng) {
  require(std::isfinite(s) && s >= 0.0, "OU time step must be finite and nonnegative");
  if (s == 0.0) return x;
  const std::size_t n = x.n();
  const double decay = std::exp(-0.5 * s);
  const double noise = std::sqrt(-std::expm1(-s));
  const auto g = detail::gue_entries(n, rng);
  std::vector<cplx> d(n * n);
  const auto e = x.entries();
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = decay * e[k] + noise * g[k];
  return {n, std::move(d)};
}

/// OU time t0 with e^{-t0/2} = cos(delta): t0 = -2 log cos(delta).
inline double embedding_time(double delta_theta) {
  if (!(std::abs(delta_theta) < std::numbers::pi / 2))
    throw DomainError("embedding_time requires |delta| < pi/2");
  return -2.0 * std::log(std::cos(delta_theta));
}

/// Two GUE-scale matrices with the joint law of (H(theta1), H(theta2)) for
/// a Ginibre matrix, built from three independent GUE draws:
/// sqrt(c) G1 + sqrt(1-c) G2 and sqrt(c) G1 + sqrt(1-c) G3, c = cos(delta).
inline std::pair<ComplexMatrix, ComplexMatrix> coupled_gue_pair(std::size_t n, double delta,
                                                                RngStream& rng) {
  const double c = std::cos(delta);
  if (!(c >= 0.0)) throw DomainError("coupled_gue_pair requires |delta| <= pi/2");
  const RngStream base = rng.split(rng.next_u64());
  RngStream s1 = base.split(11), s2 = base.split(12), s3 = base.split(13);
  const auto g1 = detail::gue_entries(n, s1);
  const auto g2 = detail::gue_entries(n, s2);
  const auto g3 = detail::gue_entries(n, s3);
  const double a = std::sqrt(c), b = std::sqrt(1.0 - c);
  std::vector<cplx> h1(n * n), h2(n * n);
  for (std::size_t k = 0; k < h1.size(); ++k) {
    h1[k] = a * g1[k] + b * g2[k];
    h2[k] = a * g1[k] + b * g3[k];
  }
  return {ComplexMatrix(n, std::move(h1)), ComplexMatrix(n, std::move(h2))};
}

namespace detail {

inline constexpr double dbm_min_gap = 1e-12;

inline bool strictly_decreasing(std::span<const double> mu) {
  for (std::size_t i = 1; i < mu.size(); ++i)
    if (!(mu[i - 1] > mu[i])) return false;
  return true;
}

// Euler step over dt with a prescribed Brownian increment per particle;
// bisects the interval with a Brownian bridge whenever ordering would break.
inline void dbm_substep(std::vector<double>& mu, double dt, std::span<const double> dw,
                        RngStream& rng, bool confined, int depth) {
  const std::size_t n = mu.size();
  const double nn = static_cast<double>(n);
  std::vector<double> next(n);
  for (std::size_t i = 0; i < n; ++i) {
    double drift = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double gap = mu[i] - mu[j];
      if (std::abs(gap) < dbm_min_gap) gap = std::copysign(dbm_min_gap, gap);
      drift += 1.0 / gap;
    }
    drift /= nn;
    if (confined) drift -= 0.5 * mu[i];
    next[i] = mu[i] + dw[i] / std::sqrt(nn) + drift * dt;
  }
  if (strictly_decreasing(next) || depth >= 40) {
    if (!strictly_decreasing(next)) std::sort(next.begin(), next.end(), std::greater<>());
    mu.swap(next);
    return;
  }
  // W(dt/2) given W(dt) = dw: dw/2 + sqrt(dt/4) xi.
  std::vector<double> first(n), second(n);
  const double sd = std::sqrt(0.25 * dt);
  for (std::size_t i = 0; i < n; ++i) {
    first[i] = 0.5 * dw[i] + sd * rng.gaussian();
    second[i] = dw[i] - first[i];
  }
  dbm_substep(mu, 0.5 * dt, first, rng, confined, depth + 1);
  dbm_substep(mu, 0.5 * dt, second, rng, confined, depth + 1);
}

}  // namespace detail

/// One Euler-Maruyama step of Dyson Brownian motion on the GUE scale,
/// d mu_i = d beta_i / sqrt(N) + [ (1/N) sum_{j != i} 1/(mu_i - mu_j) - mu_i/2 ] dt,
/// with the confining term only when `confined`. Input sorted decreasing.
inline std::vector<double> dbm_step(std::span<const double> mu, double dt, RngStream& rng,
                                    bool confined) {
  require(!mu.empty(), "DBM needs at least one particle");
  require(std::isfinite(dt) && dt > 0.0, "DBM time step must be positive");
  require(detail::strictly_decreasing(mu), "DBM input must be strictly decreasing");
  std::vector<double> state(mu.begin(), mu.end());
  std::vector<double> dw(mu.size());
  const double s = std::sqrt(dt);
  for (auto& w : dw) w = s * rng.gaussian();
  detail::dbm_substep(state, dt, dw, rng, confined, 0);
  return state;
}

}  // namespace fovlab
