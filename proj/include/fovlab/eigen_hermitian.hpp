#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "fovlab/error.hpp"
#include "fovlab/matrix.hpp"
#include "fovlab/tridiagonal.hpp"

namespace fovlab {

/// Eigenvalues sorted non-increasing, with an a posteriori accuracy bound.
struct Spectrum {
  std::vector<double> values;
  double residual_bound = 0.0;
};

/// H = Q D T D* Q*, where Q is a product of Householder reflectors and D is
/// a diagonal unitary that makes the off-diagonal of T real nonnegative.
class TridiagonalReduction {
 public:
  explicit TridiagonalReduction(const HermitianMatrix& h) : n_(h.n()) {
    const std::size_t n = n_;
    std::vector<cplx> a(h.entries().begin(), h.entries().end());
    std::vector<cplx> sub(n > 1 ? n - 1 : 0);
    reflectors_.resize(n > 2 ? n - 2 : 0);

    std::vector<cplx> p(n), q(n);
    for (std::size_t k = 0; k + 2 < n; ++k) {
      const std::size_t m = n - k - 1;  // length of the column below the diagonal
      std::vector<cplx>& u = reflectors_[k];
      u.assign(m, 0.0);
      double xnorm = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        u[i] = a[(k + 1 + i) * n + k];
        xnorm += std::norm(u[i]);
      }
      xnorm = std::sqrt(xnorm);
      double tail = 0.0;
      for (std::size_t i = 1; i < m; ++i) tail += std::norm(u[i]);
      if (tail == 0.0) {
        // Column already reduced; identity reflector.
        sub[k] = u[0];
        u.clear();
        continue;
      }
      const cplx x0 = u[0];
      const double ax0 = std::abs(x0);
      const cplx phase = ax0 > 0.0 ? x0 / ax0 : cplx(1.0);
      const cplx alpha = -phase * xnorm;
      u[0] -= alpha;
      const double unorm = norm2(u);
      for (auto& v : u) v /= unorm;
      sub[k] = alpha;

      // Trailing block update A <- A - 2(u q* + q u*), q = p - (u* p) u, p = A u.
      const std::size_t off = k + 1;
      for (std::size_t i = 0; i < m; ++i) {
        cplx s = 0.0;
        const cplx* row = a.data() + (off + i) * n + off;
        for (std::size_t j = 0; j < m; ++j) s += detail::mul(row[j], u[j]);
        p[i] = s;
      }
      double kappa = 0.0;
      for (std::size_t i = 0; i < m; ++i) kappa += detail::conj_mul(u[i], p[i]).real();
      for (std::size_t i = 0; i < m; ++i) q[i] = p[i] - kappa * u[i];
      for (std::size_t i = 0; i < m; ++i) {
        cplx* row = a.data() + (off + i) * n + off;
        const cplx ui = 2.0 * u[i], qi = 2.0 * q[i];
        for (std::size_t j = 0; j < m; ++j)
          row[j] -= detail::mul_conj(ui, q[j]) + detail::mul_conj(qi, u[j]);
      }
      // Column k below the subdiagonal is now zero.
      for (std::size_t i = 1; i < m; ++i) {
        a[(off + i) * n + k] = 0.0;
        a[k * n + off + i] = 0.0;
      }
    }
    if (n >= 2) sub[n - 2] = a[(n - 1) * n + (n - 2)];

    t_.diag.resize(n);
    for (std::size_t i = 0; i < n; ++i) t_.diag[i] = a[i * n + i].real();
    t_.off.resize(sub.size());
    phases_.assign(n, cplx(1.0));
    for (std::size_t k = 0; k < sub.size(); ++k) {
      const double mag = std::abs(sub[k]);
      t_.off[k] = mag;
      phases_[k + 1] = mag > 0.0 ? phases_[k] * (sub[k] / mag) : phases_[k];
    }
  }

  const Tridiagonal& tridiagonal() const noexcept { return t_; }

  /// Maps an eigenvector y of T to the eigenvector Q D y of H.
  std::vector<cplx> back_transform(std::span<const double> y) const {
    std::vector<cplx> x(n_);
    for (std::size_t i = 0; i < n_; ++i) x[i] = phases_[i] * y[i];
    for (std::size_t k = reflectors_.size(); k-- > 0;) {
      const auto& u = reflectors_[k];
      if (u.empty()) continue;
      const std::size_t off = k + 1;
      cplx s = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) s += detail::conj_mul(u[i], x[off + i]);
      s *= 2.0;
      for (std::size_t i = 0; i < u.size(); ++i) x[off + i] -= detail::mul(s, u[i]);
    }
    return x;
  }

 private:
  std::size_t n_;
  Tridiagonal t_;
  std::vector<std::vector<cplx>> reflectors_;
  std::vector<cplx> phases_;
};

inline double hermitian_residual_bound(const HermitianMatrix& h) {
  return 4.0 * static_cast<double>(h.n()) * std::numeric_limits<double>::epsilon() *
         h.frobenius_norm();
}

/// Full spectrum: Householder tridiagonalization, then implicit QL.
inline Spectrum eigvalsh(const HermitianMatrix& h) {
  require(h.n() >= 1, "empty matrix");
  if (h.n() == 1) return {{h(0, 0).real()}, 0.0};
  TridiagonalReduction red(h);
  return {tridiagonal_eigenvalues(red.tridiagonal()), hermitian_residual_bound(h)};
}

/// Top eigenpair. residual = ||H x - value x|| for the returned unit vector.
struct TopEigenpair {
  double value = 0.0;
  std::vector<cplx> vector;
  double residual = 0.0;
  int iterations = 0;  // Krylov steps when produced by Lanczos; 0 for the dense path
};

inline double residual_norm(const HermitianMatrix& h, std::span<const cplx> x, double value) {
  const auto hx = h.apply(x);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::norm(hx[i] - value * x[i]);
  return std::sqrt(s);
}

/// Dense top eigenpair: tridiagonalize, QL for the value, inverse iteration
/// on T for the vector, back-transform.
inline TopEigenpair top_eigenpair_dense(const HermitianMatrix& h, int refinement_steps = 3) {
  require(h.n() >= 1, "empty matrix");
  if (h.n() == 1) return {h(0, 0).real(), {cplx(1.0)}, 0.0, 0};
  TridiagonalReduction red(h);
  const double top = tridiagonal_eigenvalues(red.tridiagonal()).front();
  const auto y = tridiagonal_eigenvector(red.tridiagonal(), top, refinement_steps);
  auto x = red.back_transform(y);
  const double nx = norm2(x);
  for (auto& v : x) v /= nx;
  const double res = residual_norm(h, x, top);
  return {top, std::move(x), res, 0};
}

}  // namespace fovlab
