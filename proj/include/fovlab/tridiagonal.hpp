#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "fovlab/error.hpp"

namespace fovlab {

/// Real symmetric tridiagonal matrix: diag[0..n), off[i] couples i and i+1.
struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> off;

  std::size_t n() const noexcept { return diag.size(); }
};

inline constexpr int max_ql_iterations = 60;

/// All eigenvalues by implicit-shift QL, sorted descending.
/// Throws ConvergenceError carrying the index of the stalled eigenvalue.
inline std::vector<double> tridiagonal_eigenvalues(const Tridiagonal& t) {
  const std::size_t n = t.n();
  std::vector<double> d(t.diag);
  std::vector<double> e(n, 0.0);
  std::copy(t.off.begin(), t.off.end(), e.begin());
  constexpr double eps = std::numeric_limits<double>::epsilon();

  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == max_ql_iterations)
          throw ConvergenceError("tridiagonal QL exceeded iteration cap", l);
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflow = false;
        for (std::size_t i = m; i-- > l;) {
          const double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  std::sort(d.begin(), d.end(), std::greater<>());
  return d;
}

/// Unit eigenvector of t for the (already accurate) eigenvalue lambda by
/// inverse iteration with a partially pivoted tridiagonal LU.
inline std::vector<double> tridiagonal_eigenvector(const Tridiagonal& t, double lambda,
                                                   int steps = 3) {
  const std::size_t n = t.n();
  if (n == 1) return {1.0};

  double scale = 0.0;
  for (double v : t.diag) scale = std::max(scale, std::abs(v));
  for (double v : t.off) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) scale = 1.0;
  const double tiny = std::numeric_limits<double>::epsilon() * scale;

  std::vector<double> dl(t.off), du(t.off), d(n), du2(n > 2 ? n - 2 : 0, 0.0);
  std::vector<unsigned char> swapped(n - 1, 0);
  for (std::size_t i = 0; i < n; ++i) d[i] = t.diag[i] - lambda;

  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(d[i]) >= std::abs(dl[i])) {
      if (d[i] == 0.0) d[i] = tiny;
      const double fact = dl[i] / d[i];
      dl[i] = fact;
      d[i + 1] -= fact * du[i];
    } else {
      const double fact = d[i] / dl[i];
      d[i] = dl[i];
      dl[i] = fact;
      const double temp = du[i];
      du[i] = d[i + 1];
      d[i + 1] = temp - fact * d[i + 1];
      if (i + 2 < n) {
        du2[i] = du[i + 1];
        du[i + 1] = -fact * du[i + 1];
      }
      swapped[i] = 1;
    }
  }
  for (auto& v : d)
    if (std::abs(v) < tiny) v = std::copysign(tiny, v == 0.0 ? 1.0 : v);

  // Deterministic start with components of both signs.
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = 1.0 + 0.5 * std::sin(1.0 + 3.0 * static_cast<double>(i));

  for (int step = 0; step < steps; ++step) {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (!swapped[i]) {
        y[i + 1] -= dl[i] * y[i];
      } else {
        const double temp = y[i] - dl[i] * y[i + 1];
        y[i] = y[i + 1];
        y[i + 1] = temp;
      }
    }
    y[n - 1] /= d[n - 1];
    y[n - 2] = (y[n - 2] - du[n - 2] * y[n - 1]) / d[n - 2];
    for (std::size_t i = n - 2; i-- > 0;) y[i] = (y[i] - du[i] * y[i + 1] - du2[i] * y[i + 2]) / d[i];

    double nrm = 0.0;
    for (double v : y) nrm += v * v;
    nrm = std::sqrt(nrm);
    for (double& v : y) v /= nrm;
  }
  return y;
}

}  // namespace fovlab
