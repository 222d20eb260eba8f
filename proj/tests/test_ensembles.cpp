#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fovlab/eigen_hermitian.hpp"
#include "fovlab/ensembles.hpp"
#include "fovlab/stats.hpp"

using namespace fovlab;

namespace {

// Mean and standard error of a stream of real observations.
struct Moment {
  double sum = 0.0, sum2 = 0.0;
  std::size_t count = 0;
  void add(double v) {
    sum += v;
    sum2 += v * v;
    ++count;
  }
  double mean() const { return sum / double(count); }
  double se() const {
    const double m = mean();
    return std::sqrt(std::max(sum2 / double(count) - m * m, 0.0) / double(count));
  }
};

void expect_within_4se(const Moment& m, double target) {
  EXPECT_LE(std::abs(m.mean() - target), 4.0 * m.se()) << "mean " << m.mean() << " target " << target;
}

}  // namespace

TEST(Rng, PureFunctionOfSeedAndStream) {
  RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  for (int k = 0; k < 100; ++k) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
    EXPECT_NE(x, d.next_u64());
  }
}

TEST(Rng, DistinctStreamsUncorrelated) {
  const std::size_t m = 100000;
  for (std::uint64_t id = 0; id < 5; ++id) {
    RngStream a(1, id), b(1, id + 1);
    std::vector<double> x(m), y(m);
    for (std::size_t k = 0; k < m; ++k) {
      x[k] = a.gaussian();
      y[k] = b.gaussian();
    }
    EXPECT_LT(std::abs(pearson(x, y)), 4.0 / std::sqrt(double(m)));
  }
  RngStream p(9, 0);
  const RngStream q = p.split(3), r = p.split(4);
  RngStream q1 = q, r1 = r;
  std::vector<double> x(m), y(m);
  for (std::size_t k = 0; k < m; ++k) {
    x[k] = q1.uniform();
    y[k] = r1.uniform();
  }
  EXPECT_LT(std::abs(pearson(x, y)), 4.0 / std::sqrt(double(m)));
}

TEST(Rng, UniformAndGaussianMoments) {
  RngStream r(3, 3);
  Moment u, g, g2;
  for (int k = 0; k < 200000; ++k) {
    u.add(r.uniform());
    const double z = r.gaussian();
    g.add(z);
    g2.add(z * z);
  }
  expect_within_4se(u, 0.5);
  expect_within_4se(g, 0.0);
  expect_within_4se(g2, 1.0);
}

TEST(Sample, ValidatesEnsembleSpec) {
  RngStream r(1, 1);
  EXPECT_THROW(sample(EnsembleSpec{Family::ginibre_complex, 0, std::nullopt}, r), ValidationError);
  EXPECT_THROW(sample(EnsembleSpec{Family::elliptic, 4, std::nullopt}, r), ValidationError);
  EXPECT_THROW(sample(EnsembleSpec::elliptic(4, 0.0), r), ValidationError);
  EXPECT_THROW(sample(EnsembleSpec::elliptic(4, 1.5), r), ValidationError);
  EXPECT_THROW(sample(EnsembleSpec{Family::gue, 4, 0.5}, r), ValidationError);
  EXPECT_THROW(parse_family("wishart"), ValidationError);
  EXPECT_EQ(parse_family("bernoulli_phase"), Family::bernoulli_phase);
}

TEST(Sample, Reproducible) {
  for (Family f : {Family::ginibre_complex, Family::gue, Family::elliptic, Family::strict_upper_triangular,
                   Family::bernoulli_phase}) {
    EnsembleSpec s{f, 12, f == Family::elliptic ? std::optional<double>(0.3) : std::nullopt};
    RngStream a(5, 2), b(5, 2);
    const auto x = sample(s, a), y = sample(s, b);
    EXPECT_TRUE(std::equal(x.entries().begin(), x.entries().end(), y.entries().begin()));
    const auto z = sample(s, a);
    EXPECT_FALSE(std::equal(x.entries().begin(), x.entries().end(), z.entries().begin()));
  }
}

TEST(Sample, GinibreMoments) {
  const std::size_t n = 128;
  Moment re, im, abs2, sq_re, sq_im;
  RngStream r(11, 0);
  for (int d = 0; d < 62; ++d) {
    const auto a = sample(EnsembleSpec::ginibre(n), r);
    for (const auto& z : a.entries()) {
      re.add(z.real());
      im.add(z.imag());
      abs2.add(std::norm(z));
      const cplx q = z * z;
      sq_re.add(q.real());
      sq_im.add(q.imag());
    }
  }
  ASSERT_GE(re.count, 1000000u);
  expect_within_4se(re, 0.0);
  expect_within_4se(im, 0.0);
  expect_within_4se(abs2, 1.0 / double(n));
  expect_within_4se(sq_re, 0.0);
  expect_within_4se(sq_im, 0.0);
}

TEST(Sample, GueStructureAndMoments) {
  const std::size_t n = 64;
  RngStream r(12, 0);
  Moment off, diag, off_sq;
  for (int d = 0; d < 40; ++d) {
    const auto w = sample(EnsembleSpec::gue(n), r);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_EQ(w(i, i).imag(), 0.0);
      diag.add(std::norm(w(i, i)));
      for (std::size_t j = i + 1; j < n; ++j) {
        EXPECT_EQ(w(i, j), std::conj(w(j, i)));
        off.add(std::norm(w(i, j)));
        off_sq.add((w(i, j) * w(i, j)).real());
      }
    }
  }
  expect_within_4se(off, 1.0 / double(n));
  expect_within_4se(diag, 1.0 / double(n));
  expect_within_4se(off_sq, 0.0);
}

TEST(Sample, EllipticGammaOneIsHermitian) {
  RngStream r(13, 0);
  const auto a = sample(EnsembleSpec::elliptic(20, 1.0), r);
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = 0; j < 20; ++j) EXPECT_EQ(a(i, j), std::conj(a(j, i)));
}

TEST(Sample, EllipticHermitianPartVariance) {
  // E|h_ij(0)|^2 = (1 + gamma) / (2N) off the diagonal.
  const std::size_t n = 100;
  const double g = 0.4;
  RngStream r(14, 0);
  Moment m;
  while (m.count < 100000) {
    const auto a = sample(EnsembleSpec::elliptic(n, g), r);
    const auto h = hermitian_part(a, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) m.add(std::norm(h(i, j)));
  }
  expect_within_4se(m, (1.0 + g) / (2.0 * double(n)));
  EXPECT_NEAR((1.0 + g) / (2.0 * double(n)), 0.007, 1e-15);
}

TEST(Sample, StrictUpperTriangularAndBernoulli) {
  const std::size_t n = 50;
  RngStream r(15, 0);
  Moment above, bern;
  for (int d = 0; d < 20; ++d) {
    const auto t = sample(EnsembleSpec{Family::strict_upper_triangular, n, std::nullopt}, r);
    const auto b = sample(EnsembleSpec{Family::bernoulli_phase, n, std::nullopt}, r);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (j <= i) {
          EXPECT_EQ(t(i, j), cplx(0.0));
        } else {
          above.add(std::norm(t(i, j)));
        }
        EXPECT_NEAR(std::norm(b(i, j)), 1.0 / double(n), 1e-17);
        bern.add(b(i, j).real());
      }
  }
  expect_within_4se(above, 1.0 / double(n));
  expect_within_4se(bern, 0.0);
}

TEST(OuUpdate, ZeroTimeIsIdentity) {
  RngStream r(20, 0);
  const auto x = sample(EnsembleSpec::gue(10), r);
  const auto y = ou_update(x, 0.0, r);
  EXPECT_TRUE(std::equal(x.entries().begin(), x.entries().end(), y.entries().begin()));
  EXPECT_THROW(ou_update(x, -0.1, r), ValidationError);
}

namespace {

// Empirical Re E X'_ij conj(X_ij) over off-diagonal entries, after steps s_k.
Moment ou_covariance(std::size_t n, std::initializer_list<double> steps, std::uint64_t seed) {
  RngStream r(seed, 0);
  Moment m;
  while (m.count < 100000) {
    const auto x = sample(EnsembleSpec::gue(n), r);
    ComplexMatrix y = x;
    for (double s : steps) y = ou_update(y, s, r);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) m.add((y(i, j) * std::conj(x(i, j))).real());
  }
  return m;
}

}  // namespace

TEST(OuUpdate, EntryCovariance) {
  const std::size_t n = 64;
  expect_within_4se(ou_covariance(n, {0.7}, 21), std::exp(-0.35) / double(n));
}

TEST(OuUpdate, SemigroupComposition) {
  const std::size_t n = 64;
  expect_within_4se(ou_covariance(n, {0.3, 0.9}, 22), std::exp(-0.6) / double(n));
}

TEST(OuUpdate, LongTimeDecorrelates) {
  expect_within_4se(ou_covariance(64, {50.0}, 23), 0.0);
}

TEST(OuUpdate, PreservesStationaryVariance) {
  RngStream r(24, 0);
  Moment m;
  while (m.count < 100000) {
    const auto y = ou_update(sample(EnsembleSpec::gue(64), r), 1.3, r);
    for (std::size_t i = 0; i < 64; ++i)
      for (std::size_t j = i + 1; j < 64; ++j) m.add(std::norm(y(i, j)));
  }
  expect_within_4se(m, 1.0 / 64.0);
}

TEST(EmbeddingTime, ClosedForms) {
  EXPECT_EQ(embedding_time(0.0), 0.0);
  EXPECT_NEAR(embedding_time(std::numbers::pi / 3), 2.0 * std::log(2.0), 1e-12);
  EXPECT_NEAR(embedding_time(std::numbers::pi / 3), 1.386294, 1e-6);
  const double d = 1e-3;
  EXPECT_NEAR(embedding_time(d) / (d * d), 1.0, 1e-5);
  EXPECT_THROW(embedding_time(std::numbers::pi / 2), DomainError);
  EXPECT_THROW(embedding_time(-2.0), DomainError);
  EXPECT_THROW(embedding_time(std::nan("")), DomainError);
}

TEST(CoupledGuePair, EntryCovarianceIsCosDelta) {
  const std::size_t n = 64;
  const double delta = 0.8;
  RngStream r(25, 0);
  Moment m;
  while (m.count < 100000) {
    const auto [a, b] = coupled_gue_pair(n, delta, r);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) m.add((a(i, j) * std::conj(b(i, j))).real());
  }
  expect_within_4se(m, std::cos(delta) / double(n));
}

TEST(Dbm, RejectsBadInput) {
  RngStream r(30, 0);
  const std::vector<double> unsorted{0.0, 1.0};
  const std::vector<double> tied{1.0, 1.0};
  const std::vector<double> ok{1.0, 0.0};
  EXPECT_THROW(dbm_step(unsorted, 0.1, r, true), ValidationError);
  EXPECT_THROW(dbm_step(tied, 0.1, r, true), ValidationError);
  EXPECT_THROW(dbm_step(ok, 0.0, r, true), ValidationError);
  EXPECT_THROW(dbm_step(std::vector<double>{}, 0.1, r, true), ValidationError);
}

TEST(Dbm, SingleParticleIsBrownian) {
  const double t = 0.25;
  RngStream r(31, 0);
  Moment inc, inc2;
  for (int p = 0; p < 10000; ++p) {
    std::vector<double> mu{0.3};
    for (int k = 0; k < 5; ++k) mu = dbm_step(mu, t / 5.0, r, false);
    inc.add(mu[0] - 0.3);
    inc2.add((mu[0] - 0.3) * (mu[0] - 0.3));
  }
  expect_within_4se(inc, 0.0);
  expect_within_4se(inc2, t);
}

TEST(Dbm, TwoParticlesRepel) {
  RngStream r(32, 0);
  Moment gap;
  const double a = 0.05;
  for (int p = 0; p < 5000; ++p) {
    std::vector<double> mu{a, -a};
    mu = dbm_step(mu, 1e-3, r, false);
    ASSERT_GT(mu[0], mu[1]);
    gap.add(mu[0] - mu[1] - 2.0 * a);
  }
  // Drift of the gap is 2/(N * 2a) = 10 per unit time, so the mean is 1e-2.
  EXPECT_GT(gap.mean(), 0.0);
  EXPECT_GT(gap.mean() - 4.0 * gap.se(), 0.0);
}

TEST(Dbm, StaysOrderedThroughNearCollisions) {
  RngStream r(33, 0);
  std::vector<double> mu{1e-6, 0.0, -1e-6};
  for (int k = 0; k < 200; ++k) {
    mu = dbm_step(mu, 1e-3, r, true);
    ASSERT_TRUE(mu[0] > mu[1] && mu[1] > mu[2]);
  }
}

TEST(Dbm, MatchesOuEvolvedLargestEigenvalue) {
  const std::size_t n = 64, trials = 500;
  const double t = 0.1;
  const int steps = 100;
  std::vector<double> ou, dbm;
  for (std::size_t k = 0; k < trials; ++k) {
    RngStream r(34, k);
    const auto x = sample(EnsembleSpec::gue(n), r);
    const auto start = eigvalsh(HermitianMatrix(x)).values;
    RngStream a = r.split(1), b = r.split(2);
    ou.push_back(eigvalsh(HermitianMatrix(ou_update(x, t, a))).values.front());
    std::vector<double> mu = start;
    for (int s = 0; s < steps; ++s) mu = dbm_step(mu, t / steps, b, true);
    dbm.push_back(mu.front());
  }
  std::sort(ou.begin(), ou.end());
  std::sort(dbm.begin(), dbm.end());
  EXPECT_LE(ks_distance(ou, dbm), 0.1);
}
