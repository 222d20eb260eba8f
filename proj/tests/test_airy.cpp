#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fovlab/airy.hpp"
#include "fovlab/stats.hpp"
#include "oracles.hpp"

using namespace fovlab;

TEST(Msc, LargeImaginaryDecay) {
  const cplx z(0.0, 1e3);
  const cplx m = msc(z);
  EXPECT_LE(std::abs(m - (-1.0 / z)) / std::abs(1.0 / z), 1e-5);
}

TEST(Msc, EdgeValue) { EXPECT_NEAR(std::abs(msc(cplx(2.0, 1e-6)) + 1.0), 0.0, 1e-3); }

TEST(Msc, DefiningEquationAndBranch) {
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) {
      const cplx z(-5.0 + 10.0 * i / 9.0, std::pow(10.0, -3.0 + 6.0 * j / 9.0));
      const cplx m = msc(z);
      EXPECT_LE(std::abs(m * m + z * m + 1.0), 1e-12) << z;
      EXPECT_GT(m.imag(), 0.0) << z;
    }
}

TEST(Msc, MatchesSemicircleIntegral) {
  // m(z) = int rho(x) / (x - z) dx with rho(x) = sqrt(4 - x^2) / (2 pi), by midpoint rule.
  const cplx z(0.7, 0.5);
  const int k = 200000;
  cplx acc = 0.0;
  for (int i = 0; i < k; ++i) {
    const double x = -2.0 + 4.0 * (i + 0.5) / k;
    acc += std::sqrt(4.0 - x * x) / (2.0 * std::numbers::pi) / (x - z);
  }
  acc *= 4.0 / k;
  EXPECT_NEAR(std::abs(msc(z) - acc), 0.0, 1e-6);
}

TEST(Msc, RejectsLowerHalfPlane) {
  EXPECT_THROW(msc(cplx(1.0, 0.0)), DomainError);
  EXPECT_THROW(msc(cplx(1.0, -1.0)), DomainError);
}

TEST(Lambda1Curve, ExactCases) {
  const auto t = uniform_thetas(16);
  const auto zero = lambda1_curve(ComplexMatrix(5), t);
  for (double v : zero.values) EXPECT_EQ(v, 0.0);
  const auto j = lambda1_curve(ComplexMatrix(2, {0.0, 1.0, 0.0, 0.0}), t);
  for (double v : j.values) EXPECT_NEAR(v, std::numbers::sqrt2 / 2.0, 1e-14);
  EXPECT_TRUE(j.lipschitz_ok());
}

TEST(Lambda1Curve, MatchesBisectionOracle) {
  const auto a = oracle::random_matrix(7, 3);
  const auto t = uniform_thetas(12);
  const auto c = lambda1_curve(a, t);
  for (std::size_t k = 0; k < t.size(); ++k)
    EXPECT_NEAR(c.values[k], std::numbers::sqrt2 * oracle::bisection_eigenvalues(hermitian_part(a, t[k])).front(),
                1e-11);
}

TEST(Lambda1Curve, LipschitzOnGinibreCurves) {
  for (std::uint64_t s = 0; s < 3; ++s) {
    RngStream r(s, 64);
    const auto a = sample(EnsembleSpec::ginibre(64), r);
    const auto c = lambda1_curve(a, uniform_thetas(256));
    EXPECT_TRUE(c.lipschitz_ok());
    for (std::size_t k = 0; k + 1 < c.values.size(); ++k)
      EXPECT_LE(std::abs(c.values[k + 1] - c.values[k]),
                std::numbers::sqrt2 * c.op_norm * (c.thetas[k + 1] - c.thetas[k]) + 1e-9);
  }
}

TEST(Lambda1Curve, RejectsBadGrid) {
  const ComplexMatrix a = ComplexMatrix::identity(2);
  EXPECT_THROW(lambda1_curve(a, std::vector<double>{1.0, 0.5}), ValidationError);
  EXPECT_THROW(lambda1_curve(a, std::vector<double>{7.0}), ValidationError);
}

TEST(Process, EntryCovarianceIsHalfCosDelta) {
  const std::size_t n = 256;
  const double d = std::numbers::pi / 3;
  double sum = 0.0, sum2 = 0.0;
  std::size_t count = 0;
  for (std::uint64_t s = 0; count < 100000; ++s) {
    RngStream r(77, s);
    const auto a = sample(EnsembleSpec::ginibre(n), r);
    const auto h0 = hermitian_part(a, 0.4), h1 = hermitian_part(a, 0.4 + d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double v = (h0(i, j) * std::conj(h1(i, j))).real();
        sum += v;
        sum2 += v * v;
        ++count;
      }
  }
  const double m = sum / double(count);
  const double se = std::sqrt((sum2 / double(count) - m * m) / double(count));
  EXPECT_NEAR(0.5 / 512.0, 9.7656e-4, 1e-8);
  EXPECT_LE(std::abs(m - std::cos(d) / (2.0 * double(n))), 4.0 * se);
}

TEST(PairCorrelation, ZeroDeltaIsExactlyOne) {
  const std::vector<double> deltas{0.0, 0.05};
  const auto pc = pair_correlation(EnsembleSpec::ginibre(32), 0.0, deltas, 40, 3);
  EXPECT_EQ(pc.correlation[0], 1.0);
  EXPECT_EQ(pc.sync_median[0], 0.0);
  EXPECT_GT(pc.correlation[1], 0.5);
  EXPECT_EQ(pc.base.size(), 40u);
}

TEST(PairCorrelation, Validation) {
  const std::vector<double> d{0.1};
  EXPECT_THROW(pair_correlation(EnsembleSpec::ginibre(16), 0.0, d, 29, 1), ValidationError);
  EXPECT_THROW(pair_correlation(EnsembleSpec::ginibre(16), 0.0, std::vector<double>{}, 40, 1), ValidationError);
  const std::vector<double> flat(40, 1.0), other(40, 2.0);
  EXPECT_TRUE(std::isnan(pearson(flat, other)));
}

TEST(PairCorrelation, ThreadCountDoesNotChangeResults) {
  const std::vector<double> d{0.2, 1.0};
  const auto a = pair_correlation(EnsembleSpec::ginibre(48), 0.3, d, 40, 9, 1);
  const auto b = pair_correlation(EnsembleSpec::ginibre(48), 0.3, d, 40, 9, 4);
  EXPECT_EQ(a.base, b.base);
  EXPECT_EQ(a.shifted, b.shifted);
}

TEST(PairCorrelation, SynchronizedThenDecorrelated) {
  const std::vector<double> d{0.01, std::numbers::pi / 2};
  const auto pc = pair_correlation(EnsembleSpec::ginibre(64), 0.0, d, 200, 5, 4);
  EXPECT_GT(pc.correlation[0], 0.9);
  EXPECT_LT(pc.correlation[1], 0.3);
  EXPECT_LT(pc.sync_median[0], pc.sync_median[1]);
}

TEST(Process, StationaryInTheta) {
  const std::vector<double> d{std::numbers::pi / 4, std::numbers::pi / 2};
  const auto pc = pair_correlation(EnsembleSpec::ginibre(64), 0.0, d, 300, 6, 4);
  const std::vector<const std::vector<double>*> series{&pc.base, &pc.shifted[0], &pc.shifted[1]};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j) {
      std::vector<double> diff(pc.trials);
      for (std::size_t t = 0; t < pc.trials; ++t) diff[t] = (*series[i])[t] - (*series[j])[t];
      EXPECT_LT(std::abs(mean(diff)), 4.0 * standard_error(diff)) << i << " " << j;
    }
}

TEST(Process, CorrelationInvariantUnderThetaShift) {
  const std::vector<double> d{0.3};
  const std::size_t trials = 200;
  const auto a = pair_correlation(EnsembleSpec::ginibre(64), 0.0, d, trials, 7, 4);
  const auto b = pair_correlation(EnsembleSpec::ginibre(64), 1.0, d, trials, 8, 4);
  const double ra = a.correlation[0], rb = b.correlation[0];
  // Delta-method standard error of a Pearson estimate.
  const double se = std::hypot(1.0 - ra * ra, 1.0 - rb * rb) / std::sqrt(double(trials));
  EXPECT_LT(std::abs(ra - rb), 4.0 * se);
}

TEST(TransitionScan, GridAndShape) {
  const auto g = transition_grid(9);
  EXPECT_NEAR(g.front(), 0.03, 1e-15);
  EXPECT_NEAR(g.back(), 3.0, 1e-14);
  for (std::size_t k = 1; k < g.size(); ++k) EXPECT_NEAR(g[k] / g[k - 1], g[1] / g[0], 1e-12);
  const std::size_t ns[] = {32};
  const auto ts = transition_scan(EnsembleSpec::ginibre(32), 0.0, ns, 60, 2, 4, 5);
  ASSERT_EQ(ts.rows.size(), 5u);
  for (const auto& r : ts.rows) EXPECT_NEAR(r.delta, r.scaled_delta * std::pow(32.0, -1.0 / 6.0), 1e-15);
  EXPECT_LT(ts.spearman[0], 0.0);
  EXPECT_THROW(transition_scan(EnsembleSpec::ginibre(32), 0.0, std::span<const std::size_t>{}, 60, 2),
               ValidationError);
}

TEST(Tails, ExponentsAndWindow) {
  EXPECT_NEAR(tail_exponent(TailSide::right, 2.0), 4.0 / 3.0 * std::pow(2.0, 1.5), 1e-15);
  EXPECT_NEAR(std::exp(-tail_exponent(TailSide::right, 2.0)), 0.023, 5e-4);
  EXPECT_NEAR(std::exp(-tail_exponent(TailSide::left, 3.0)), 0.105, 5e-4);
  EXPECT_TRUE(in_tail_window(TailSide::right, 2.5, 256));
  EXPECT_FALSE(in_tail_window(TailSide::right, 0.5, 256));
  EXPECT_FALSE(in_tail_window(TailSide::left, 4.0, 256));
  EXPECT_EQ(parse_tail_side("left"), TailSide::left);
  EXPECT_THROW(parse_tail_side("up"), ValidationError);
}

TEST(Tails, PlanningValidation) {
  TailConfig c;
  c.x_grid = {1.5, 2.0, 2.5};
  EXPECT_NO_THROW(c.validate());
  c.trials = 100;
  EXPECT_THROW(c.validate(), ValidationError);
  c.trials = 20000;
  c.x_grid = {-1.0};
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Tails, CountsRatiosAndZeroFlags) {
  TailConfig c;
  c.side = TailSide::left;
  c.x_grid = {2.0, 10.0};
  c.trials = 8;
  const std::vector<double> s{-3.0, -2.5, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0};
  const auto te = tail_from_samples(c, s);
  EXPECT_EQ(te.points[0].count, 3u);
  EXPECT_NEAR(te.points[0].p_hat, 3.0 / 8.0, 1e-15);
  EXPECT_NEAR(te.points[0].ratio, -std::log(3.0 / 8.0) / (8.0 / 12.0), 1e-14);
  EXPECT_LE(te.points[0].ci_lo, te.points[0].p_hat);
  EXPECT_GE(te.points[0].ci_hi, te.points[0].p_hat);
  EXPECT_TRUE(te.points[1].zero_count);
  EXPECT_TRUE(std::isnan(te.points[1].ratio));
  EXPECT_FALSE(te.points[1].in_window);
  EXPECT_THROW(tail_from_samples(c, std::vector<double>{1.0}), ValidationError);
}

TEST(Tails, EdgeSamplesDeterministic) {
  const auto a = edge_samples(Family::ginibre_complex, 32, 0.0, 20, 4, 1);
  const auto b = edge_samples(Family::ginibre_complex, 32, 0.0, 20, 4, 3);
  EXPECT_EQ(a, b);
}

TEST(ProductForm, IndependentAndDegenerate) {
  RngStream r(50, 0);
  std::vector<double> a(40000), b(40000);
  for (std::size_t k = 0; k < a.size(); ++k) {
    a[k] = r.gaussian();
    b[k] = r.gaussian();
  }
  const auto pf = product_form(a, b, TailSide::right, 1.0);
  EXPECT_NEAR(pf.ratio, 1.0, 0.15);
  const auto same = product_form(a, a, TailSide::right, 1.0);
  EXPECT_NEAR(same.ratio, double(same.trials) / double(same.first), 1e-12);
  EXPECT_TRUE(std::isnan(product_form(a, b, TailSide::right, 50.0).ratio));
}

TEST(Stats, WilsonInterval) {
  const double z = 1.959963984540054;
  const std::size_t k = 7, n = 40;
  const double p = double(k) / n;
  const double c = (p + z * z / (2 * n)) / (1 + z * z / n);
  const double h = z / (1 + z * z / n) * std::sqrt(p * (1 - p) / n + z * z / (4.0 * n * n));
  const auto w = wilson(k, n);
  EXPECT_NEAR(w.lo, c - h, 1e-15);
  EXPECT_NEAR(w.hi, c + h, 1e-15);
  EXPECT_EQ(wilson(0, 10).lo, 0.0);
  EXPECT_GT(wilson(0, 10).hi, 0.0);
}

TEST(Stats, KolmogorovSmirnovHandExample) {
  const std::vector<double> a{1.0, 2.0, 3.0}, b{1.5, 2.5};
  EXPECT_NEAR(ks_distance(a, b), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(ks_distance(a, a), 0.0);
}

TEST(Stats, RanksAndSpearman) {
  const std::vector<double> x{3.0, 1.0, 2.0, 2.0};
  EXPECT_EQ(ranks(x), (std::vector<double>{4.0, 1.0, 2.5, 2.5}));
  const std::vector<double> u{1, 2, 3, 4, 5}, v{10, 8, 7, 1, -3};
  EXPECT_NEAR(spearman(u, v), -1.0, 1e-15);
  EXPECT_NEAR(median(std::vector<double>{4.0, 1.0, 3.0, 2.0}), 2.5, 1e-15);
  const auto [slope, icept] = linear_fit(u, std::vector<double>{3, 5, 7, 9, 11});
  EXPECT_NEAR(slope, 2.0, 1e-14);
  EXPECT_NEAR(icept, 1.0, 1e-14);
}
