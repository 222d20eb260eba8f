#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

#include "fovlab/eigen_hermitian.hpp"
#include "fovlab/error.hpp"
#include "fovlab/lanczos.hpp"
#include "fovlab/matrix.hpp"
#include "fovlab/rng.hpp"

namespace fovlab {

namespace detail {

// In-place Householder reduction of a row-major n x n matrix to upper
// Hessenberg form by unitary similarity.
inline void reduce_to_hessenberg(std::vector<cplx>& a, std::size_t n) {
  std::vector<cplx> u, s(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t off = k + 1, m = n - off;
    u.assign(m, 0.0);
    double tail = 0.0, xnorm = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      u[i] = a[(off + i) * n + k];
      xnorm += std::norm(u[i]);
      if (i > 0) tail += std::norm(u[i]);
    }
    if (tail == 0.0) continue;
    xnorm = std::sqrt(xnorm);
    const double ax0 = std::abs(u[0]);
    const cplx phase = ax0 > 0.0 ? u[0] / ax0 : cplx(1.0);
    u[0] += phase * xnorm;
    const double un = norm2(u);
    for (auto& v : u) v /= un;

    // Left: rows off.., columns k..n-1.
    std::fill(s.begin(), s.end(), cplx(0.0));
    for (std::size_t i = 0; i < m; ++i) {
      const cplx ui = std::conj(u[i]);
      const cplx* row = a.data() + (off + i) * n;
      for (std::size_t j = k; j < n; ++j) s[j] += mul(ui, row[j]);
    }
    for (std::size_t i = 0; i < m; ++i) {
      const cplx ui = 2.0 * u[i];
      cplx* row = a.data() + (off + i) * n;
      for (std::size_t j = k; j < n; ++j) row[j] -= mul(ui, s[j]);
    }
    // Right: all rows, columns off..n-1.
    for (std::size_t i = 0; i < n; ++i) {
      cplx* row = a.data() + i * n + off;
      cplx t = 0.0;
      for (std::size_t j = 0; j < m; ++j) t += mul(row[j], u[j]);
      t *= 2.0;
      for (std::size_t j = 0; j < m; ++j) row[j] -= mul_conj(t, u[j]);
    }
    for (std::size_t i = 1; i < m; ++i) a[(off + i) * n + k] = 0.0;
  }
}

}  // namespace detail

/// All eigenvalues of a general complex matrix: Householder reduction to
/// upper Hessenberg form, then single-shift complex QR (Wilkinson shift)
/// with deflation when |h[k+1,k]| <= eps (|h[k,k]| + |h[k+1,k+1]|).
inline std::vector<cplx> eigvals_general(const ComplexMatrix& b) {
  const std::size_t n = b.n();
  if (n == 1) return {b(0, 0)};
  std::vector<cplx> h(b.entries().begin(), b.entries().end());
  detail::reduce_to_hessenberg(h, n);
  auto at = [&](std::size_t i, std::size_t j) -> cplx& { return h[i * n + j]; };

  constexpr double eps = std::numeric_limits<double>::epsilon();
  const std::size_t cap = 30 * n;
  std::vector<cplx> eig(n);
  std::vector<double> cs(n);
  std::vector<cplx> sn(n);
  std::size_t hi = n - 1, iter = 0;
  while (true) {
    if (hi == 0) {
      eig[0] = at(0, 0);
      break;
    }
    std::size_t l = hi;
    for (; l > 0; --l) {
      const double scale = std::abs(at(l - 1, l - 1)) + std::abs(at(l, l));
      if (std::abs(at(l, l - 1)) <= eps * scale) {
        at(l, l - 1) = 0.0;
        break;
      }
    }
    if (l == hi) {
      eig[hi] = at(hi, hi);
      --hi;
      iter = 0;
      continue;
    }
    if (++iter > cap) throw ConvergenceError("Hessenberg QR exceeded iteration cap", hi);

    cplx shift;
    if (iter % 10 == 0) {
      // Exceptional shift to break cycles.
      shift = at(hi, hi) + std::abs(at(hi, hi - 1).real()) +
              (hi >= 2 ? std::abs(at(hi - 1, hi - 2).real()) : 0.0);
    } else {
      const cplx a = at(hi - 1, hi - 1), bb = at(hi - 1, hi), c = at(hi, hi - 1), d = at(hi, hi);
      const cplx half = 0.5 * (a - d);
      const cplx disc = std::sqrt(detail::mul(half, half) + detail::mul(bb, c));
      const cplx mid = 0.5 * (a + d);
      const cplx m1 = mid + disc, m2 = mid - disc;
      shift = std::abs(m1 - d) < std::abs(m2 - d) ? m1 : m2;
    }

    for (std::size_t k = l; k <= hi; ++k) at(k, k) -= shift;
    for (std::size_t k = l; k < hi; ++k) {
      const cplx x = at(k, k), y = at(k + 1, k);
      const double ax = std::abs(x), ay = std::abs(y);
      const double r = std::hypot(ax, ay);
      double c;
      cplx s;
      if (r == 0.0) {
        c = 1.0;
        s = 0.0;
      } else if (ax == 0.0) {
        c = 0.0;
        s = std::conj(y) / ay;
      } else {
        c = ax / r;
        s = detail::mul_conj(x / ax, y) / r;
      }
      cs[k] = c;
      sn[k] = s;
      for (std::size_t j = k; j <= hi; ++j) {
        const cplx p = at(k, j), q = at(k + 1, j);
        at(k, j) = c * p + detail::mul(s, q);
        at(k + 1, j) = c * q - detail::conj_mul(s, p);
      }
    }
    for (std::size_t k = l; k < hi; ++k) {
      const double c = cs[k];
      const cplx s = sn[k];
      const std::size_t last = std::min(k + 1, hi);
      for (std::size_t i = l; i <= last; ++i) {
        const cplx p = at(i, k), q = at(i, k + 1);
        at(i, k) = c * p + detail::mul_conj(q, s);
        at(i, k + 1) = c * q - detail::mul(p, s);
      }
    }
    for (std::size_t k = l; k <= hi; ++k) at(k, k) += shift;
  }
  return eig;
}

inline double spectral_radius(const ComplexMatrix& b) {
  double r = 0.0;
  for (const auto& z : eigvals_general(b)) r = std::max(r, std::abs(z));
  return r;
}

struct OperatorNorm {
  double value = 0.0;  // sqrt of the Ritz value (a lower bound)
  double upper = 0.0;  // sqrt(Ritz value + residual)
};

/// Largest singular value as sqrt(lambda_max(B* B)), Lanczos at relative
/// tolerance 1e-12 on the implicit Gram operator.
inline OperatorNorm operator_norm_bounds(const ComplexMatrix& b) {
  const std::size_t n = b.n();
  if (n == 1) return {std::abs(b(0, 0)), std::abs(b(0, 0))};
  const double fro = b.frobenius_norm();
  if (fro == 0.0) return {0.0, 0.0};
  SplitMatrix sb(b);
  GramOperator gram(sb);
  LanczosOptions opt;
  opt.abs_tol = 1e-12 * fro * fro;
  RngStream rng(0x6F705F6E6F726DULL, n);
  auto res = lanczos_top(gram, opt, rng);
  if (!res.converged) {
    const auto spec = eigvalsh(HermitianMatrix(b.adjoint() * b));
    const double v = std::sqrt(std::max(0.0, spec.values.front()));
    const double u = std::sqrt(std::max(0.0, spec.values.front() + spec.residual_bound));
    return {v, u};
  }
  const double mu = std::max(0.0, res.pair.value);
  return {std::sqrt(mu), std::sqrt(mu + res.pair.residual)};
}

inline double operator_norm(const ComplexMatrix& b) { return operator_norm_bounds(b).value; }

}  // namespace fovlab
