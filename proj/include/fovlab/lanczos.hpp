#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "fovlab/eigen_hermitian.hpp"
#include "fovlab/error.hpp"
#include "fovlab/matrix.hpp"
#include "fovlab/rng.hpp"
#include "fovlab/tridiagonal.hpp"

namespace fovlab {

namespace detail {

// Complex vectors in split (re, im) storage; the hot loops below are written
// in axpy form so they vectorize without reassociation.
struct SplitVec {
  std::vector<double> re, im;
  explicit SplitVec(std::size_t n = 0) : re(n, 0.0), im(n, 0.0) {}
  std::size_t size() const noexcept { return re.size(); }
};

inline cplx split_dot(const double* ar, const double* ai, const double* br, const double* bi,
                      std::size_t n) {
  // conj(a) . b
  double sr = 0.0, si = 0.0;
#pragma omp simd reduction(+ : sr, si)
  for (std::size_t i = 0; i < n; ++i) {
    sr += ar[i] * br[i] + ai[i] * bi[i];
    si += ar[i] * bi[i] - ai[i] * br[i];
  }
  return {sr, si};
}

inline double split_norm(const double* ar, const double* ai, std::size_t n) {
  double s = 0.0;
#pragma omp simd reduction(+ : s)
  for (std::size_t i = 0; i < n; ++i) s += ar[i] * ar[i] + ai[i] * ai[i];
  return std::sqrt(s);
}

// y -= c * x
inline void split_axmy(cplx c, const double* xr, const double* xi, double* yr, double* yi,
                       std::size_t n) {
  const double cr = c.real(), ci = c.imag();
  for (std::size_t i = 0; i < n; ++i) {
    yr[i] -= cr * xr[i] - ci * xi[i];
    yi[i] -= cr * xi[i] + ci * xr[i];
  }
}

}  // namespace detail

/// Dense Hermitian operator in split storage. y = H x is evaluated as
/// y = sum_j conj(H[j, :]) x_j, which only reads rows.
class DenseHermitianOperator {
 public:
  DenseHermitianOperator() = default;

  explicit DenseHermitianOperator(const HermitianMatrix& h)
      : n_(h.n()), re_(h.n() * h.n()), im_(h.n() * h.n()) {
    const auto e = h.entries();
    for (std::size_t k = 0; k < e.size(); ++k) {
      re_[k] = e[k].real();
      im_[k] = e[k].imag();
    }
    fro_ = h.frobenius_norm();
  }

  /// c * X + s * Y for Hermitian X, Y given in split form.
  DenseHermitianOperator(const DenseHermitianOperator& x, const DenseHermitianOperator& y,
                         double c, double s)
      : n_(x.n_), re_(x.re_.size()), im_(x.im_.size()) {
    double f = 0.0;
    for (std::size_t k = 0; k < re_.size(); ++k) {
      re_[k] = c * x.re_[k] + s * y.re_[k];
      im_[k] = c * x.im_[k] + s * y.im_[k];
      f += re_[k] * re_[k] + im_[k] * im_[k];
    }
    fro_ = std::sqrt(f);
  }

  std::size_t n() const noexcept { return n_; }
  double frobenius_norm() const noexcept { return fro_; }

  void apply(const double* xr, const double* xi, double* yr, double* yi) const {
    std::fill(yr, yr + n_, 0.0);
    std::fill(yi, yi + n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      const double a = xr[j], b = xi[j];
      const double* hr = re_.data() + j * n_;
      const double* hi = im_.data() + j * n_;
      for (std::size_t i = 0; i < n_; ++i) {
        yr[i] += hr[i] * a + hi[i] * b;
        yi[i] += hr[i] * b - hi[i] * a;
      }
    }
  }

  HermitianMatrix to_matrix() const {
    std::vector<cplx> d(n_ * n_);
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = {re_[k], im_[k]};
    return {n_, std::move(d)};
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> re_, im_;
  double fro_ = 0.0;
};

/// General square matrix in split storage with row-access kernels for both
/// B x and B* x.
class SplitMatrix {
 public:
  SplitMatrix() = default;

  explicit SplitMatrix(const ComplexMatrix& b)
      : n_(b.n()), re_(b.n() * b.n()), im_(b.n() * b.n()), tre_(b.n() * b.n()),
        tim_(b.n() * b.n()) {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) {
        const cplx v = b(i, j);
        re_[i * n_ + j] = v.real();
        im_[i * n_ + j] = v.imag();
        tre_[j * n_ + i] = v.real();
        tim_[j * n_ + i] = v.imag();
      }
  }

  std::size_t n() const noexcept { return n_; }

  // y = B x, summing columns of B (rows of B^T).
  void apply(const double* xr, const double* xi, double* yr, double* yi) const {
    std::fill(yr, yr + n_, 0.0);
    std::fill(yi, yi + n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      const double a = xr[j], b = xi[j];
      const double* cr = tre_.data() + j * n_;
      const double* ci = tim_.data() + j * n_;
      for (std::size_t i = 0; i < n_; ++i) {
        yr[i] += cr[i] * a - ci[i] * b;
        yi[i] += cr[i] * b + ci[i] * a;
      }
    }
  }

  // y = B* x, summing conjugated rows of B.
  void apply_adjoint(const double* xr, const double* xi, double* yr, double* yi) const {
    std::fill(yr, yr + n_, 0.0);
    std::fill(yi, yi + n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      const double a = xr[j], b = xi[j];
      const double* rr = re_.data() + j * n_;
      const double* ri = im_.data() + j * n_;
      for (std::size_t i = 0; i < n_; ++i) {
        yr[i] += rr[i] * a + ri[i] * b;
        yi[i] += rr[i] * b - ri[i] * a;
      }
    }
  }

  /// x* B x
  cplx rayleigh(std::span<const cplx> x) const {
    detail::SplitVec v(n_), w(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      v.re[i] = x[i].real();
      v.im[i] = x[i].imag();
    }
    apply(v.re.data(), v.im.data(), w.re.data(), w.im.data());
    return detail::split_dot(v.re.data(), v.im.data(), w.re.data(), w.im.data(), n_);
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> re_, im_, tre_, tim_;
};

/// The Hermitian operator B* B, applied without forming the product.
class GramOperator {
 public:
  explicit GramOperator(const SplitMatrix& b) : b_(&b), tmp_(b.n()) {}

  std::size_t n() const noexcept { return b_->n(); }

  void apply(const double* xr, const double* xi, double* yr, double* yi) const {
    b_->apply(xr, xi, tmp_.re.data(), tmp_.im.data());
    b_->apply_adjoint(tmp_.re.data(), tmp_.im.data(), yr, yi);
  }

 private:
  const SplitMatrix* b_;
  mutable detail::SplitVec tmp_;
};

struct LanczosOptions {
  double abs_tol = 1e-10;     // target Ritz residual ||H x - theta x||
  std::size_t max_iterations = 0;  // 0 means 4 n
  std::size_t max_basis = 192;     // restart length
  double start_noise = 1e-3;       // relative random perturbation of a warm start
};

struct LanczosResult {
  TopEigenpair pair;
  bool converged = false;
};

/// Largest eigenpair of a Hermitian operator by Lanczos with full
/// reorthogonalization and explicit restarts from the current Ritz vector.
template <class Op>
LanczosResult lanczos_top(const Op& op, const LanczosOptions& opt, RngStream& rng,
                          std::span<const cplx> start = {}) {
  const std::size_t n = op.n();
  require(n >= 1, "empty operator");
  const std::size_t max_iter = opt.max_iterations ? opt.max_iterations : 4 * n;
  const std::size_t basis_cap = std::max<std::size_t>(2, std::min(n, opt.max_basis));

  detail::SplitVec v(n);
  if (start.size() == n) {
    const double sn = norm2(start);
    const double noise = opt.start_noise / std::sqrt(static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      v.re[i] = start[i].real() / sn + noise * rng.gaussian();
      v.im[i] = start[i].imag() / sn + noise * rng.gaussian();
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      v.re[i] = rng.gaussian();
      v.im[i] = rng.gaussian();
    }
  }

  std::vector<double> vr(n * basis_cap), vi(n * basis_cap);
  std::vector<double> alpha, beta;
  detail::SplitVec w(n), hx(n);
  std::size_t total = 0;
  LanczosResult out;

  auto finish = [&](const detail::SplitVec& x) {
    op.apply(x.re.data(), x.im.data(), hx.re.data(), hx.im.data());
    const double mu = detail::split_dot(x.re.data(), x.im.data(), hx.re.data(), hx.im.data(), n).real();
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = hx.re[i] - mu * x.re[i], b = hx.im[i] - mu * x.im[i];
      r += a * a + b * b;
    }
    out.pair.value = mu;
    out.pair.residual = std::sqrt(r);
    out.pair.vector.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.pair.vector[i] = {x.re[i], x.im[i]};
  };

  detail::SplitVec ritz(n);
  while (true) {
    const double nv = detail::split_norm(v.re.data(), v.im.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      vr[i] = v.re[i] / nv;
      vi[i] = v.im[i] / nv;
    }
    alpha.clear();
    beta.clear();
    bool restart = false;
    for (std::size_t j = 0;; ++j) {
      const double* qr = vr.data() + j * n;
      const double* qi = vi.data() + j * n;
      op.apply(qr, qi, w.re.data(), w.im.data());
      ++total;
      const double a = detail::split_dot(qr, qi, w.re.data(), w.im.data(), n).real();
      alpha.push_back(a);
      // Two passes of classical Gram-Schmidt against the whole basis.
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t i = 0; i <= j; ++i) {
          const double* br = vr.data() + i * n;
          const double* bi = vi.data() + i * n;
          const cplx c = detail::split_dot(br, bi, w.re.data(), w.im.data(), n);
          detail::split_axmy(c, br, bi, w.re.data(), w.im.data(), n);
        }
      const double b = detail::split_norm(w.re.data(), w.im.data(), n);
      const std::size_t k = j + 1;

      const bool invariant = b <= 64.0 * std::numeric_limits<double>::epsilon() *
                                      std::max(1.0, std::abs(a));
      const bool full = k == basis_cap;
      const bool out_of_budget = total >= max_iter;
      if ((k >= 2 && (k < 16 || k % 4 == 0)) || invariant || full || out_of_budget || n == 1) {
        Tridiagonal t{alpha, std::vector<double>(beta.begin(), beta.end())};
        const double theta = tridiagonal_eigenvalues(t).front();
        const auto s = tridiagonal_eigenvector(t, theta, 2);
        const double est = b * std::abs(s.back());
        if (est <= opt.abs_tol || invariant || full || out_of_budget || n == 1) {
          std::fill(ritz.re.begin(), ritz.re.end(), 0.0);
          std::fill(ritz.im.begin(), ritz.im.end(), 0.0);
          for (std::size_t i = 0; i < k; ++i) {
            const double* br = vr.data() + i * n;
            const double* bi = vi.data() + i * n;
            for (std::size_t r = 0; r < n; ++r) {
              ritz.re[r] += s[i] * br[r];
              ritz.im[r] += s[i] * bi[r];
            }
          }
          finish(ritz);
          out.pair.iterations = static_cast<int>(total);
          if (out.pair.residual <= opt.abs_tol || invariant || n == 1) {
            out.converged = out.pair.residual <= opt.abs_tol || invariant || n == 1;
            return out;
          }
          if (out_of_budget) {
            out.converged = false;
            return out;
          }
          // Estimate met but true residual lagging, or basis full: restart.
          v = ritz;
          restart = true;
          break;
        }
      }
      beta.push_back(b);
      double* nr = vr.data() + k * n;
      double* ni = vi.data() + k * n;
      for (std::size_t i = 0; i < n; ++i) {
        nr[i] = w.re[i] / b;
        ni[i] = w.im[i] / b;
      }
    }
    if (!restart) break;
  }
  return out;
}

/// Top eigenpair of H by Lanczos, converged when the Ritz residual is at
/// most tol * ||H||_F; falls back to the dense solver on non-convergence.
inline TopEigenpair top_eigenpair(const HermitianMatrix& h, double tol, RngStream& rng,
                                  std::span<const cplx> start = {}) {
  require(tol > 0.0, "tolerance must be positive");
  if (h.n() == 1) return {h(0, 0).real(), {cplx(1.0)}, 0.0, 0};
  DenseHermitianOperator op(h);
  LanczosOptions opt;
  opt.abs_tol = tol * std::max(op.frobenius_norm(), std::numeric_limits<double>::min());
  auto res = lanczos_top(op, opt, rng, start);
  if (res.converged) return std::move(res.pair);
  return top_eigenpair_dense(h);
}

inline double lambda_max(const HermitianMatrix& h, double tol, RngStream& rng) {
  return top_eigenpair(h, tol, rng).value;
}

}  // namespace fovlab
