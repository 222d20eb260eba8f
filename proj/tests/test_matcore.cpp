#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fovlab/eigen_general.hpp"
#include "fovlab/eigen_hermitian.hpp"
#include "fovlab/ensembles.hpp"
#include "fovlab/lanczos.hpp"
#include "fovlab/matrix.hpp"
#include "oracles.hpp"

using namespace fovlab;

namespace {

const ComplexMatrix jordan(2, {0.0, 1.0, 0.0, 0.0});

void expect_matrix_near(const HermitianMatrix& a, const std::vector<cplx>& b, double tol) {
  ASSERT_EQ(a.entries().size(), b.size());
  for (std::size_t k = 0; k < b.size(); ++k) EXPECT_NEAR(std::abs(a.entries()[k] - b[k]), 0.0, tol) << k;
}

}  // namespace

TEST(ComplexMatrix, RejectsBadShapesAndValues) {
  EXPECT_THROW(ComplexMatrix(2, {1.0, 2.0, 3.0}), ValidationError);
  EXPECT_THROW(ComplexMatrix(0, {}), ValidationError);
  EXPECT_THROW(ComplexMatrix(1, {cplx(NAN, 0.0)}), ValidationError);
  EXPECT_THROW(ComplexMatrix(1, {cplx(0.0, INFINITY)}), ValidationError);
}

TEST(HermitianMatrix, SymmetrizesExactly) {
  const auto h = HermitianMatrix(oracle::random_matrix(5, 3));
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(h(i, i).imag(), 0.0);
    for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(h(i, j), std::conj(h(j, i)));
  }
}

TEST(HermitianPart, JordanBlockAtZero) {
  expect_matrix_near(hermitian_part(jordan, 0.0), {0.0, 0.5, 0.5, 0.0}, 0.0);
}

TEST(HermitianPart, IdentityGivesCosine) {
  for (double t : {0.0, 0.3, 1.7, 3.0, -2.2}) {
    const auto h = hermitian_part(ComplexMatrix::identity(3), t);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(std::abs(h(i, j) - (i == j ? std::cos(t) : 0.0)), 0.0, 1e-15);
  }
}

TEST(HermitianPart, HermitianInputVanishesAtQuarterTurn) {
  const auto b = HermitianMatrix(oracle::random_matrix(4, 5)).as_complex();
  const auto h = hermitian_part(b, std::numbers::pi / 2);
  EXPECT_LT(h.frobenius_norm(), 1e-15 * b.frobenius_norm() * 10);
}

TEST(HermitianPart, HalfTurnNegates) {
  const auto b = oracle::random_matrix(6, 11);
  for (double t : {0.1, 1.0, 2.5}) {
    const auto a = hermitian_part(b, t), c = hermitian_part(b, t + std::numbers::pi);
    for (std::size_t k = 0; k < a.entries().size(); ++k)
      EXPECT_NEAR(std::abs(a.entries()[k] + c.entries()[k]), 0.0, 1e-14);
  }
}

TEST(HermitianPart, CosineSineDecomposition) {
  const auto b = oracle::random_matrix(5, 12);
  const auto x = hermitian_part(b, 0.0), y = hermitian_part(b, std::numbers::pi / 2);
  const double t = 0.77;
  const auto h = hermitian_part(b, t);
  for (std::size_t k = 0; k < h.entries().size(); ++k)
    EXPECT_NEAR(std::abs(h.entries()[k] - (std::cos(t) * x.entries()[k] + std::sin(t) * y.entries()[k])), 0.0, 1e-14);
}

TEST(Eigvalsh, RankOneProjector) {
  const auto s = eigvalsh(HermitianMatrix(2, {1.0, 1.0, 1.0, 1.0}));
  EXPECT_NEAR(s.values[0], 2.0, 1e-14);
  EXPECT_NEAR(s.values[1], 0.0, 1e-14);
}

TEST(Eigvalsh, PhaseSimilarity) {
  for (double t : {0.0, 0.4, 2.0, -1.3}) {
    const cplx p = std::polar(0.5, t);
    const auto s = eigvalsh(HermitianMatrix(2, {0.0, p, std::conj(p), 0.0}));
    EXPECT_NEAR(s.values[0], 0.5, 1e-15);
    EXPECT_NEAR(s.values[1], -0.5, 1e-15);
  }
}

TEST(Eigvalsh, SingleEntry) {
  const auto s = eigvalsh(HermitianMatrix(1, {cplx(-3.5, 0.0)}));
  ASSERT_EQ(s.values.size(), 1u);
  EXPECT_EQ(s.values[0], -3.5);
}

TEST(Eigvalsh, MatchesInertiaBisectionOracle) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto h = oracle::random_hermitian(8, seed);
    const auto s = eigvalsh(h);
    const auto ref = oracle::bisection_eigenvalues(h);
    for (std::size_t k = 0; k < 8; ++k) EXPECT_NEAR(s.values[k], ref[k], 1e-10) << seed << " " << k;
  }
}

TEST(Eigvalsh, SortedWithFiniteBound) {
  const auto s = eigvalsh(oracle::random_hermitian(20, 8));
  EXPECT_TRUE(std::is_sorted(s.values.rbegin(), s.values.rend()));
  EXPECT_TRUE(std::isfinite(s.residual_bound));
  EXPECT_GE(s.residual_bound, 0.0);
}

TEST(Eigvalsh, TraceFrobeniusAndShiftIdentities) {
  for (std::size_t n : {3u, 17u, 40u}) {
    const auto h = oracle::random_hermitian(n, 100 + n);
    const auto s = eigvalsh(h);
    double sum = 0.0, sq = 0.0;
    for (double v : s.values) {
      sum += v;
      sq += v * v;
    }
    const double f = h.frobenius_norm();
    const double gate = 1e-9 * double(n) * f;
    EXPECT_NEAR(sum, h.trace(), gate);
    EXPECT_NEAR(sq, f * f, gate * f);
    const double c = 2.75;
    const auto t = eigvalsh(h.shifted(c));
    for (std::size_t k = 0; k < n; ++k)
      EXPECT_NEAR(t.values[k], s.values[k] + c, s.residual_bound + t.residual_bound);
  }
}

TEST(TopEigenpairDense, VectorIsAccurate) {
  const auto h = oracle::random_hermitian(30, 4);
  const auto p = top_eigenpair_dense(h);
  EXPECT_NEAR(norm2(p.vector), 1.0, 1e-13);
  EXPECT_LT(p.residual, 1e-11 * h.frobenius_norm());
  EXPECT_NEAR(p.value, eigvalsh(h).values[0], 1e-12 * h.frobenius_norm());
}

TEST(LambdaMax, DiagonalAndJordan) {
  RngStream rng(1, 1);
  const std::vector<double> d{3.0, 1.0, -5.0};
  EXPECT_NEAR(lambda_max(HermitianMatrix::diagonal(d), 1e-12, rng), 3.0, 1e-10);
  EXPECT_NEAR(lambda_max(hermitian_part(jordan, 0.0), 1e-12, rng), 0.5, 1e-12);
}

TEST(LambdaMax, AgreesWithEigvalshOnGue) {
  RngStream rng(42, 0);
  const auto w = HermitianMatrix(sample(EnsembleSpec::gue(64), rng));
  const auto s = eigvalsh(w);
  RngStream lr(42, 1);
  const auto p = top_eigenpair(w, 1e-12, lr);
  EXPECT_NEAR(p.value, s.values[0], 1e-9);
  EXPECT_LE(std::abs(p.value - s.values[0]), p.residual + s.residual_bound + 1e-15);
}

TEST(LambdaMax, AgreesWithPowerIterationOracle) {
  const auto h = oracle::random_hermitian(12, 77).shifted(40.0);
  RngStream rng(3, 3);
  EXPECT_NEAR(lambda_max(h, 1e-12, rng), oracle::power_lambda_max(h), 1e-8);
}

TEST(EigvalsGeneral, NilpotentAndDiagonal) {
  for (const auto& z : eigvals_general(jordan)) EXPECT_LT(std::abs(z), 1e-12);
  const auto e = eigvals_general(ComplexMatrix::diagonal(std::vector<cplx>{cplx(1, 1), -2.0}));
  ASSERT_EQ(e.size(), 2u);
  const bool order1 = std::abs(e[0] - cplx(1, 1)) < 1e-14 && std::abs(e[1] + 2.0) < 1e-14;
  const bool order2 = std::abs(e[1] - cplx(1, 1)) < 1e-14 && std::abs(e[0] + 2.0) < 1e-14;
  EXPECT_TRUE(order1 || order2);
}

TEST(EigvalsGeneral, ProductMatchesLuDeterminant) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto b = oracle::random_matrix(6, seed);
    cplx prod = 1.0, sum = 0.0;
    for (const auto& z : eigvals_general(b)) {
      prod *= z;
      sum += z;
    }
    const cplx det = oracle::determinant(b);
    EXPECT_LT(std::abs(prod - det), 1e-8 * std::abs(det)) << seed;
    EXPECT_LT(std::abs(sum - b.trace()), 1e-10 * b.frobenius_norm()) << seed;
  }
}

TEST(EigvalsGeneral, EachEigenvalueMakesShiftSingular) {
  const auto b = oracle::random_matrix(12, 5);
  const double fro = b.frobenius_norm();
  for (const auto& z : eigvals_general(b)) {
    std::vector<cplx> d(b.entries().begin(), b.entries().end());
    for (std::size_t i = 0; i < 12; ++i) d[i * 12 + i] -= z;
    // |det(B - z I)| relative to the product of column norms (Hadamard).
    const ComplexMatrix s(12, d);
    double had = 1.0;
    for (std::size_t j = 0; j < 12; ++j) {
      double c = 0.0;
      for (std::size_t i = 0; i < 12; ++i) c += std::norm(s(i, j));
      had *= std::sqrt(c);
    }
    EXPECT_LT(std::abs(oracle::determinant(s)) / had, 1e-9 * fro);
  }
}

TEST(EigvalsGeneral, UpperTriangularAndScalar) {
  const ComplexMatrix t(3, {1.0, 5.0, 2.0, 0.0, cplx(0, 2), 7.0, 0.0, 0.0, -3.0});
  auto e = eigvals_general(t);
  std::sort(e.begin(), e.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
  EXPECT_NEAR(std::abs(e[0] + 3.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(e[1] - cplx(0, 2)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(e[2] - 1.0), 0.0, 1e-12);
  EXPECT_EQ(eigvals_general(ComplexMatrix(1, {cplx(2, -1)}))[0], cplx(2, -1));
}

TEST(OperatorNorm, SmallCases) {
  EXPECT_NEAR(operator_norm(ComplexMatrix::diagonal(std::vector<cplx>{2.0, -1.0})), 2.0, 1e-12);
  EXPECT_NEAR(operator_norm(jordan), 1.0, 1e-12);
  EXPECT_EQ(operator_norm(ComplexMatrix(3)), 0.0);
}

TEST(OperatorNorm, MatchesDenseGramSpectrum) {
  const auto b = oracle::random_matrix(60, 21);
  const auto s = eigvalsh(HermitianMatrix(b.adjoint() * b));
  const auto ob = operator_norm_bounds(b);
  EXPECT_NEAR(ob.value, std::sqrt(s.values[0]), 1e-9 * ob.value);
  EXPECT_GE(ob.upper, ob.value);
}

TEST(SpectralRadius, SmallCases) {
  EXPECT_LT(spectral_radius(jordan), 1e-12);
  EXPECT_NEAR(spectral_radius(ComplexMatrix::diagonal(std::vector<cplx>{cplx(1, 1), -2.0})), 2.0, 1e-14);
}

TEST(SpectralRadius, NeverExceedsOperatorNorm) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    RngStream rng(seed, 7);
    const Family fams[] = {Family::ginibre_complex, Family::strict_upper_triangular, Family::bernoulli_phase,
                           Family::gue};
    const auto b = sample(EnsembleSpec{fams[seed % 4], 10 + seed % 7, std::nullopt}, rng);
    EXPECT_LE(spectral_radius(b), operator_norm(b) + 1e-8) << seed;
  }
}

TEST(GinibreLimits, OperatorNormAndSpectralRadiusAtN256) {
  double op = 0.0, rho = 0.0;
  const int trials = 50;
  for (int t = 0; t < trials; ++t) {
    RngStream rng(2718, t);
    const auto a = sample(EnsembleSpec::ginibre(256), rng);
    op += operator_norm(a);
    rho += spectral_radius(a);
  }
  EXPECT_NEAR(op / trials, 2.0, 0.1);
  EXPECT_NEAR(rho / trials, 1.0, 0.05);
}
