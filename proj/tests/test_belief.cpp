#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

namespace seob {
namespace {

std::vector<MarginalFamily> sample_families() {
  return {
      MarginalFamily::exponential(1.0, 3),
      MarginalFamily::exponential(0.7, Vector{{1.0, 0.4, 2.5}}),
      MarginalFamily::uniform(1.3, 3),
      MarginalFamily::pareto(1.0, 1.5, Vector{{1.0, 0.6, 1.4}}),
      MarginalFamily::pareto(0.8, 0.7, Vector{{1.0, 1.0, 0.5}}),
      MarginalFamily::pareto(1.2, 2.5, Vector{{0.3, 0.3, 0.3}}),
      MarginalFamily::tabulated(std::vector<TabulatedFamily::Table>(
          3, TabulatedFamily::Table{{0.0, -1.0}, {0.3, -0.2}, {0.8, 0.4}, {1.0, 1.5}})),
  };
}

TEST(MarginalFamily, ValidatesParameters) {
  EXPECT_THROW(MarginalFamily::exponential(0.0, 2), InvalidInput);
  EXPECT_THROW(MarginalFamily::exponential(1.0, Vector{{1.0, -1.0}}), InvalidInput);
  EXPECT_THROW(MarginalFamily::uniform(-1.0, 2), InvalidInput);
  EXPECT_THROW(MarginalFamily::pareto(1.0, 1.0, Vector::Ones(2)), InvalidInput);
  EXPECT_THROW(MarginalFamily::pareto(1.0, -0.5, Vector::Ones(2)), InvalidInput);
  EXPECT_THROW(MarginalFamily::tabulated({{{0.0, 1.0}, {1.0, 0.0}}}), InvalidInput);
  EXPECT_THROW(MarginalFamily::tabulated({{{0.1, 0.0}, {1.0, 1.0}}}), InvalidInput);
  EXPECT_EQ(MarginalFamily::pareto(1.0, 2.0, Vector::Ones(4)).num_actions(), 4);
}

TEST(Cdf, ExponentialValues) {
  const auto f = MarginalFamily::exponential(1.0, 2);
  EXPECT_EQ(cdf(f, 0, -1e6), 0.0);
  EXPECT_NEAR(cdf(f, 0, 0.0), 1.0 - std::exp(-1.0), 1e-15);
  EXPECT_NEAR(cdf(f, 0, 0.0), 0.63212, 1e-5);
  EXPECT_THROW(cdf(f, 2, 0.0), InvalidInput);
}

TEST(Cdf, UniformValue) {
  const auto f = MarginalFamily::uniform(1.0, 2);
  EXPECT_NEAR(cdf(f, 0, 0.0), 0.75, 1e-15);
  EXPECT_EQ(cdf(f, 0, -3.0 - 1e-9), 0.0);
  EXPECT_EQ(cdf(f, 0, 1.0 + 1e-9), 1.0);
}

TEST(Cdf, NondecreasingAndClipped) {
  for (const auto& f : sample_families()) {
    for (int i = 0; i < 3; ++i) {
      double prev = 0.0;
      for (double s = -20.0; s <= 20.0; s += 0.01) {
        const double v = cdf(f, i, s);
        EXPECT_GE(v, prev) << f.describe();
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        prev = v;
      }
    }
  }
}

TEST(Quantile, ClosedFormValues) {
  const auto e = MarginalFamily::exponential(1.0, 2);
  EXPECT_NEAR(quantile(e, 0, 1.0 - std::exp(-1.0)), 0.0, 1e-12);
  EXPECT_EQ(quantile(e, 0, 1.0), kInfinity);
  const auto u = MarginalFamily::uniform(1.0, 2);
  EXPECT_NEAR(quantile(u, 0, 0.75), 0.0, 1e-15);
  EXPECT_NEAR(support_lower(u, 0), -3.0, 1e-15);
  EXPECT_NEAR(support_upper(u, 0), 1.0, 1e-15);
  EXPECT_NEAR(support_upper(MarginalFamily::pareto(2.0, 1.5, Vector::Ones(2)), 1), 4.0, 1e-15);
  EXPECT_EQ(support_upper(MarginalFamily::pareto(2.0, 0.5, Vector::Ones(2)), 1), kInfinity);
  EXPECT_THROW(quantile(e, 0, 1.5), InvalidInput);
  EXPECT_THROW(quantile(e, 0, -0.1), InvalidInput);
}

TEST(Quantile, RoundTripWhereStrictlyIncreasing) {
  for (const auto& f : sample_families()) {
    for (int i = 0; i < 3; ++i) {
      double prev = -kInfinity;
      for (int k = 1; k < 1000; ++k) {
        const double t = k / 1000.0;
        const double s = quantile(f, i, t);
        EXPECT_GE(s, prev);
        prev = s;
        // Above the lower support end the CDF is strictly increasing.
        if (cdf(f, i, s) > 0.0) EXPECT_NEAR(cdf(f, i, s), t, 1e-9) << f.describe() << " t=" << t;
      }
    }
  }
}

TEST(Quantile, LeftQuantileBracketsCdf) {
  Rng rng(3);
  for (const auto& f : sample_families()) {
    for (int rep = 0; rep < 200; ++rep) {
      const int i = static_cast<int>(rng.index(3));
      const double s = rng.uniform(-3.0, 3.0);
      const double t = cdf(f, i, s);
      if (t <= 0.0 || t >= 1.0) continue;
      EXPECT_LE(quantile(f, i, t), s + 1e-9) << f.describe();
    }
  }
}

TEST(Quantile, ParetoFamilyConsistency) {
  const int n = 3;
  const double gamma = 0.9;
  const auto p2 = MarginalFamily::pareto(gamma, 2.0, Vector::Constant(n, 1.0 / n));
  const auto u = MarginalFamily::uniform(gamma, n);
  for (int k = 0; k <= 100; ++k) {
    const double p = k / 100.0;
    EXPECT_NEAR(tail_quantile(p2, 0, p), tail_quantile(u, 0, p), 1e-9);
  }
  const auto near_exp = MarginalFamily::pareto(1.0, 1.001, Vector::Ones(n));
  const auto e = MarginalFamily::exponential(1.0, n);
  for (double p = 0.05; p <= 0.95 + 1e-12; p += 0.01) {
    EXPECT_NEAR(tail_quantile(near_exp, 1, p), tail_quantile(e, 1, p), 1e-2);
  }
}

TEST(Density, ClosedFormValues) {
  EXPECT_NEAR(density_at_quantile(MarginalFamily::exponential(2.0, 2), 0, 0.5), 0.25, 1e-15);
  const auto u = MarginalFamily::uniform(1.0, 3);
  for (double p : {0.01, 0.2, 0.3, 0.33}) EXPECT_NEAR(density_at_quantile(u, 1, p), 1.0 / 6.0, 1e-15);
  EXPECT_THROW(density_at_quantile(u, 0, 0.0), InvalidInput);
  EXPECT_THROW(density_at_quantile(u, 0, 1.0), InvalidInput);
}

TEST(Density, ClosedFormsMatchFiniteDifferences) {
  for (const auto& f : sample_families()) {
    if (!f.has_closed_form_density()) continue;
    for (int i = 0; i < 3; ++i) {
      for (int k = 1; k < 100; ++k) {
        const double p = k / 100.0;
        // Stay inside the support of the uniform family.
        if (f.kind() == FamilyKind::Uniform && p > 1.0 / 3.0 - 1e-3) continue;
        EXPECT_NEAR(density_at_quantile(f, i, p), numeric_density_at_quantile(f, i, p), 1e-6)
            << f.describe() << " p=" << p;
      }
    }
  }
}

TEST(Regularizer, ClosedFormValues) {
  EXPECT_NEAR(regularizer(MarginalFamily::exponential(1.0, 2), Vector{{0.5, 0.5}}), std::log(2.0), 1e-15);
  EXPECT_NEAR(regularizer(MarginalFamily::exponential(1.0, 2), Vector{{0.5, 0.5}}), 0.69315, 1e-5);
  EXPECT_EQ(regularizer(MarginalFamily::exponential(1.0, 3), unit_vector(3, 1)), 0.0);
  EXPECT_NEAR(regularizer(MarginalFamily::uniform(2.0, 4), Vector::Constant(4, 0.25)), 0.0, 1e-15);
  EXPECT_THROW(regularizer(MarginalFamily::uniform(2.0, 2), Vector{{0.7, 0.7}}), InvalidInput);
  EXPECT_THROW(regularizer(MarginalFamily::uniform(2.0, 3), Vector{{0.5, 0.5}}), InvalidInput);
}

TEST(Regularizer, ClosedFormsAgreeWithQuadrature) {
  Rng rng(91);
  for (const auto& f : sample_families()) {
    for (int rep = 0; rep < 50; ++rep) {
      const Vector p = rng.simplex_point(3);
      EXPECT_NEAR(regularizer(f, p), quadrature_regularizer(f, p), 1e-8) << f.describe();
    }
  }
}

TEST(Regularizer, IsConcave) {
  Rng rng(92);
  for (const auto& f : sample_families()) {
    for (int rep = 0; rep < 200; ++rep) {
      const Vector p = rng.simplex_point(3);
      const Vector q = rng.simplex_point(3);
      const double a = rng.uniform();
      const Vector m = a * p + (1 - a) * q;
      EXPECT_GE(regularizer(f, m), a * regularizer(f, p) + (1 - a) * regularizer(f, q) - 1e-9)
          << f.describe();
    }
  }
}

TEST(Regularizer, ParetoApproachesEntropyNearQOne) {
  // The integral form tends to +gamma sum p ln(1/p) as q -> 1 from either side.
  const Vector p{{0.2, 0.5, 0.3}};
  const double entropy = regularizer(MarginalFamily::exponential(1.0, 3), p);
  EXPECT_GT(entropy, 0.0);
  EXPECT_NEAR(regularizer(MarginalFamily::pareto(1.0, 1.0001, Vector::Ones(3)), p), entropy, 1e-3);
  EXPECT_NEAR(regularizer(MarginalFamily::pareto(1.0, 0.9999, Vector::Ones(3)), p), entropy, 1e-3);
}

TEST(Regularizer, TermDerivativeIsTailQuantile) {
  for (const auto& f : sample_families()) {
    for (int k = 1; k < 20; ++k) {
      const double x = k / 20.0 + 0.013;
      const double h = 1e-6;
      const double fd = (regularizer_term(f, 0, x + h) - regularizer_term(f, 0, x - h)) / (2 * h);
      EXPECT_NEAR(fd, tail_quantile(f, 0, x), 1e-5) << f.describe() << " x=" << x;
    }
  }
}

}  // namespace
}  // namespace seob
