#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fovlab/error.hpp"

namespace fovlab {

using cplx = std::complex<double>;

namespace detail {

// Plain complex products; std::complex operator* routes through the
// Annex G NaN/Inf recovery path, which dominates dense kernels.
inline cplx mul(cplx a, cplx b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}
// a * conj(b)
inline cplx mul_conj(cplx a, cplx b) {
  return {a.real() * b.real() + a.imag() * b.imag(), a.imag() * b.real() - a.real() * b.imag()};
}
// conj(a) * b
inline cplx conj_mul(cplx a, cplx b) {
  return {a.real() * b.real() + a.imag() * b.imag(), a.real() * b.imag() - a.imag() * b.real()};
}

inline bool all_finite(std::span<const cplx> v) {
  for (const auto& z : v)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

}  // namespace detail

/// Dense square complex matrix, row-major. Entries are validated finite at
/// construction and the object is immutable afterwards.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;

  explicit ComplexMatrix(std::size_t n) : n_(n), data_(n * n) {
    require(n >= 1, "matrix dimension must be positive");
  }

  ComplexMatrix(std::size_t n, std::vector<cplx> entries) : n_(n), data_(std::move(entries)) {
    require(n >= 1, "matrix dimension must be positive");
    require(data_.size() == n * n, "entry count " + std::to_string(data_.size()) +
                                       " does not match n^2 = " + std::to_string(n * n));
    require(detail::all_finite(data_), "matrix has non-finite entries");
  }

  static ComplexMatrix identity(std::size_t n) {
    std::vector<cplx> d(n * n);
    for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 1.0;
    return {n, std::move(d)};
  }

  static ComplexMatrix diagonal(std::span<const cplx> diag) {
    const std::size_t n = diag.size();
    std::vector<cplx> d(n * n);
    for (std::size_t i = 0; i < n; ++i) d[i * n + i] = diag[i];
    return {n, std::move(d)};
  }

  std::size_t n() const noexcept { return n_; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  std::span<const cplx> entries() const noexcept { return data_; }
  const cplx* row(std::size_t i) const { return data_.data() + i * n_; }

  ComplexMatrix adjoint() const {
    std::vector<cplx> d(n_ * n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) d[j * n_ + i] = std::conj(data_[i * n_ + j]);
    return {n_, std::move(d)};
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (const auto& z : data_) s += std::norm(z);
    return std::sqrt(s);
  }

  cplx trace() const {
    cplx t = 0.0;
    for (std::size_t i = 0; i < n_; ++i) t += data_[i * n_ + i];
    return t;
  }

  friend ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b) {
    require(a.n_ == b.n_, "dimension mismatch");
    std::vector<cplx> d(a.data_);
    for (std::size_t k = 0; k < d.size(); ++k) d[k] += b.data_[k];
    return {a.n_, std::move(d)};
  }

  friend ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b) {
    require(a.n_ == b.n_, "dimension mismatch");
    std::vector<cplx> d(a.data_);
    for (std::size_t k = 0; k < d.size(); ++k) d[k] -= b.data_[k];
    return {a.n_, std::move(d)};
  }

  friend ComplexMatrix operator*(cplx s, const ComplexMatrix& a) {
    std::vector<cplx> d(a.data_);
    for (auto& z : d) z *= s;
    return {a.n_, std::move(d)};
  }

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    require(a.n_ == b.n_, "dimension mismatch");
    const std::size_t n = a.n_;
    std::vector<cplx> d(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        const cplx aik = a.data_[i * n + k];
        if (aik == 0.0) continue;
        const cplx* brow = b.row(k);
        cplx* drow = d.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) drow[j] += detail::mul(aik, brow[j]);
      }
    return {n, std::move(d)};
  }

  std::vector<cplx> apply(std::span<const cplx> x) const {
    require(x.size() == n_, "vector length mismatch");
    std::vector<cplx> y(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      cplx s = 0.0;
      const cplx* r = row(i);
      for (std::size_t j = 0; j < n_; ++j) s += detail::mul(r[j], x[j]);
      y[i] = s;
    }
    return y;
  }

  bool operator==(const ComplexMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<cplx> data_;
};

/// Dense Hermitian matrix. Construction from an arbitrary square matrix
/// symmetrizes as (M + M*)/2, so Hermiticity holds exactly.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;

  explicit HermitianMatrix(const ComplexMatrix& m) : n_(m.n()), data_(m.n() * m.n()) {
    for (std::size_t i = 0; i < n_; ++i) {
      data_[i * n_ + i] = m(i, i).real();
      for (std::size_t j = i + 1; j < n_; ++j) {
        const cplx v = 0.5 * (m(i, j) + std::conj(m(j, i)));
        data_[i * n_ + j] = v;
        data_[j * n_ + i] = std::conj(v);
      }
    }
  }

  HermitianMatrix(std::size_t n, std::vector<cplx> entries)
      : HermitianMatrix(ComplexMatrix(n, std::move(entries))) {}

  static HermitianMatrix diagonal(std::span<const double> diag) {
    std::vector<cplx> d(diag.size() * diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) d[i * diag.size() + i] = diag[i];
    return {diag.size(), std::move(d)};
  }

  std::size_t n() const noexcept { return n_; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  std::span<const cplx> entries() const noexcept { return data_; }
  const cplx* row(std::size_t i) const { return data_.data() + i * n_; }

  ComplexMatrix as_complex() const { return {n_, data_}; }

  double frobenius_norm() const {
    double s = 0.0;
    for (const auto& z : data_) s += std::norm(z);
    return std::sqrt(s);
  }

  double trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < n_; ++i) t += data_[i * n_ + i].real();
    return t;
  }

  HermitianMatrix shifted(double c) const {
    HermitianMatrix h(*this);
    for (std::size_t i = 0; i < n_; ++i) h.data_[i * n_ + i] += c;
    return h;
  }

  HermitianMatrix scaled(double c) const {
    HermitianMatrix h(*this);
    for (auto& z : h.data_) z *= c;
    return h;
  }

  std::vector<cplx> apply(std::span<const cplx> x) const {
    require(x.size() == n_, "vector length mismatch");
    std::vector<cplx> y(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      cplx s = 0.0;
      const cplx* r = row(i);
      for (std::size_t j = 0; j < n_; ++j) s += detail::mul(r[j], x[j]);
      y[i] = s;
    }
    return y;
  }

  bool operator==(const HermitianMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<cplx> data_;
};

/// H(e^{i theta} B) = (e^{i theta} B + e^{-i theta} B*) / 2.
inline HermitianMatrix hermitian_part(const ComplexMatrix& b, double theta) {
  require(std::isfinite(theta), "theta must be finite");
  const std::size_t n = b.n();
  const cplx ph = std::polar(1.0, theta);
  std::vector<cplx> d(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    d[i * n + i] = detail::mul(ph, b(i, i)).real();
    for (std::size_t j = i + 1; j < n; ++j) {
      const cplx v = 0.5 * (detail::mul(ph, b(i, j)) + std::conj(detail::mul(ph, b(j, i))));
      d[i * n + j] = v;
      d[j * n + i] = std::conj(v);
    }
  }
  return {n, std::move(d)};
}

inline double norm2(std::span<const cplx> x) {
  double s = 0.0;
  for (const auto& z : x) s += std::norm(z);
  return std::sqrt(s);
}

inline cplx dot(std::span<const cplx> x, std::span<const cplx> y) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += detail::conj_mul(x[i], y[i]);
  return s;
}

/// x* B x
inline cplx rayleigh(const ComplexMatrix& b, std::span<const cplx> x) {
  return dot(x, b.apply(x));
}

}  // namespace fovlab
