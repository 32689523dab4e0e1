#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "meanmax/estimators.hpp"
#include "oracles.hpp"

using namespace meanmax;
using meanmax::testing::ordered_draw_mean_max;
using meanmax::testing::subset_mean_max;

namespace {

std::vector<double> random_values(std::mt19937_64& gen, std::size_t b, bool integers) {
  std::uniform_real_distribution<double> real(0.0, 1.0);
  std::uniform_int_distribution<int> integer(0, 9);
  std::vector<double> v(b);
  for (auto& x : v) x = integers ? integer(gen) : real(gen);
  return v;
}

}  // namespace

TEST(ScoreSample, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(ScoreSample(std::vector<double>{}), InvalidInput);
  try {
    ScoreSample s({1.0, NAN});
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_EQ(e.code(), InputErrc::non_finite_value);
  }
  EXPECT_THROW(ScoreSample({1.0, INFINITY}), InvalidInput);
}

TEST(ScoreSample, KeepsIngestionOrderAndSortedView) {
  const ScoreSample s({3.0, 1.0, 2.0});
  EXPECT_EQ(std::vector<double>(s.ingestion_order().begin(), s.ingestion_order().end()),
            (std::vector<double>{3.0, 1.0, 2.0}));
  EXPECT_EQ(std::vector<double>(s.sorted().begin(), s.sorted().end()),
            (std::vector<double>{1.0, 2.0, 3.0}));
  EXPECT_DOUBLE_EQ(s.mean(), 2.0);
  EXPECT_DOUBLE_EQ(s.stddev(), 1.0);
  EXPECT_EQ(s.min(), 1.0);
  EXPECT_EQ(s.max(), 3.0);
}

TEST(Weights, SumToOneAndMatchClosedForms) {
  for (std::size_t b : {1U, 2U, 7U, 50U, 200U}) {
    for (std::size_t n = 1; n <= b; n += std::max<std::size_t>(1, b / 7)) {
      const auto v = meanmax_weights(b, n);
      const auto u = unbiased_weights(b, n);
      EXPECT_NEAR(std::accumulate(v.begin(), v.end(), 0.0), 1.0, 1e-12);
      EXPECT_NEAR(std::accumulate(u.begin(), u.end(), 0.0), 1.0, 1e-12);
      for (std::size_t j = 1; j <= b; ++j) {
        const double bd = static_cast<double>(b);
        const double expected_v = std::pow(j / bd, n) - std::pow((j - 1) / bd, n);
        EXPECT_NEAR(v[j - 1], expected_v, 1e-14);
        const double expected_u =
            j < n ? 0.0
                  : std::exp(std::lgamma(j) - std::lgamma(n) - std::lgamma(j - n + 1.0) -
                             (std::lgamma(b + 1.0) - std::lgamma(n + 1.0) - std::lgamma(b - n + 1.0)));
        EXPECT_NEAR(u[j - 1], expected_u, 1e-12 * std::max(1.0, expected_u));
      }
    }
  }
}

TEST(Weights, RejectBadBudgets) {
  EXPECT_THROW(meanmax_weights(5, 0), InvalidInput);
  EXPECT_THROW(unbiased_weights(5, 0), InvalidInput);
  try {
    unbiased_weights(5, 6);
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_EQ(e.code(), InputErrc::budget_exceeds_sample);
  }
  EXPECT_NO_THROW(meanmax_weights(5, 60));
}

TEST(Estimators, MatchBruteForceOracles) {
  std::mt19937_64 gen(7);
  for (std::size_t b = 1; b <= 7; ++b) {
    for (int rep = 0; rep < 3; ++rep) {
      const auto values = random_values(gen, b, rep == 0);
      const ScoreSample s(values);
      for (std::size_t n = 1; n <= b; ++n) {
        const double u_ref = subset_mean_max(values, n);
        const double v_ref = ordered_draw_mean_max(values, n);
        EXPECT_NEAR(unbiased_u(s, n), u_ref, 1e-12 * std::max(1.0, std::abs(u_ref)));
        EXPECT_NEAR(meanmax_v(s, n), v_ref, 1e-12 * std::max(1.0, std::abs(v_ref)));
      }
    }
  }
}

TEST(Estimators, MeanMaxBeyondSampleSizeMatchesDrawOracle) {
  const std::vector<double> values{0.2, 0.9, 0.5};
  const ScoreSample s(values);
  EXPECT_NEAR(meanmax_v(s, 6), ordered_draw_mean_max(values, 6), 1e-12);
}

TEST(Estimators, TwoPointExample) {
  const ScoreSample s({0.0, 1.0});
  EXPECT_DOUBLE_EQ(meanmax_v(s, 2), 0.75);
  EXPECT_DOUBLE_EQ(unbiased_u(s, 2), 1.0);
  EXPECT_DOUBLE_EQ(meanmax_v(s, 1), 0.5);
  EXPECT_DOUBLE_EQ(unbiased_u(s, 1), 0.5);
}

TEST(EstimatorProperties, DominanceAndEqualityAtOne) {
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<std::size_t> size(1, 64);
  for (int rep = 0; rep < 2000; ++rep) {
    const std::size_t b = size(gen);
    const ScoreSample s(random_values(gen, b, rep % 3 == 0));
    EXPECT_NEAR(meanmax_v(s, 1), unbiased_u(s, 1), 1e-12);
    EXPECT_NEAR(meanmax_v(s, 1), s.mean(), 1e-12);
    for (std::size_t n = 1; n <= b; ++n) {
      const double v = meanmax_v(s, n);
      const double u = unbiased_u(s, n);
      ASSERT_LE(v, u) << "B=" << b << " n=" << n;
      if (n >= 2 && s.min() < s.max() && rep % 3 != 0) {
        ASSERT_LT(v, u);
      }
    }
  }
}

TEST(EstimatorProperties, BoundedMonotoneAndPermutationInvariant) {
  std::mt19937_64 gen(13);
  std::uniform_int_distribution<std::size_t> size(1, 40);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t b = size(gen);
    auto values = random_values(gen, b, rep % 2 == 0);
    const ScoreSample s(values);
    std::shuffle(values.begin(), values.end(), gen);
    const ScoreSample shuffled(values);
    for (auto kind : {EstimatorKind::meanmax, EstimatorKind::unbiased}) {
      double previous = -INFINITY;
      for (std::size_t n = 1; n <= b; ++n) {
        const double e = estimate(s, kind, n);
        EXPECT_GE(e, s.min());
        EXPECT_LE(e, s.max());
        EXPECT_GE(e, previous - 1e-12);
        EXPECT_EQ(e, estimate(shuffled, kind, n));
        previous = e;
      }
    }
    EXPECT_DOUBLE_EQ(unbiased_u(s, b), s.max());
  }
}

TEST(EstimatorProperties, ConstantSampleIsExact) {
  const ScoreSample s(std::vector<double>(37, 0.8125));
  for (std::size_t n = 1; n <= 37; ++n) {
    EXPECT_EQ(meanmax_v(s, n), 0.8125);
    EXPECT_EQ(unbiased_u(s, n), 0.8125);
    EXPECT_EQ(meanmax_prefix(s, n), 0.8125);
  }
}

TEST(EstimatorProperties, MeanMaxApproachesSampleMax) {
  const ScoreSample s({0.1, 0.4, 0.7});
  EXPECT_NEAR(meanmax_v(s, 400), 0.7, 1e-12);
}

TEST(Prefix, UsesFirstNValuesInIngestionOrder) {
  const ScoreSample s({3.0, 1.0, 2.0, 10.0});
  EXPECT_DOUBLE_EQ(meanmax_prefix(s, 1), 3.0);
  EXPECT_DOUBLE_EQ(meanmax_prefix(s, 2), 2.5);
  const ScoreSample first3({3.0, 1.0, 2.0});
  EXPECT_DOUBLE_EQ(meanmax_prefix(s, 3), meanmax_v(first3, 3));
  EXPECT_THROW(meanmax_prefix(s, 5), InvalidInput);
}

TEST(EstimatorKind, RoundTripsNames) {
  for (auto kind : {EstimatorKind::meanmax, EstimatorKind::meanmax_prefix, EstimatorKind::unbiased}) {
    EXPECT_EQ(parse_estimator_kind(to_string(kind)), kind);
  }
  EXPECT_THROW(parse_estimator_kind("median"), InvalidInput);
  EXPECT_FALSE(requires_budget_within_sample(EstimatorKind::meanmax));
  EXPECT_TRUE(requires_budget_within_sample(EstimatorKind::unbiased));
  EXPECT_TRUE(requires_budget_within_sample(EstimatorKind::meanmax_prefix));
}

TEST(Curve, HasOnePointPerBudget) {
  const ScoreSample s({0.5, 0.6, 0.9, 0.7});
  const auto curve = expected_max_curve(s, EstimatorKind::unbiased, 4);
  ASSERT_EQ(curve.points.size(), 4U);
  EXPECT_EQ(curve.sample_size, 4U);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(curve.points[i].n, i + 1);
    EXPECT_EQ(curve.points[i].estimate, unbiased_u(s, i + 1));
    EXPECT_FALSE(curve.points[i].ci.has_value());
  }
  EXPECT_THROW(expected_max_curve(s, EstimatorKind::unbiased, 5), InvalidInput);
  EXPECT_EQ(expected_max_curve(s, EstimatorKind::meanmax, 9).points.size(), 9U);
}

TEST(Ks, EcdfPowerAndBound) {
  const ScoreSample s({1.0, 2.0, 3.0, 4.0});
  EXPECT_EQ(ecdf_pow(s, 0.5, 3), 0.0);
  EXPECT_DOUBLE_EQ(ecdf_pow(s, 2.0, 2), 0.25);
  EXPECT_EQ(ecdf_pow(s, 4.0, 7), 1.0);
  EXPECT_NEAR(ks_lower_bound(0.9, 10), 1.0 - std::pow(0.9, 10), 1e-15);
  EXPECT_EQ(ks_lower_bound(1.0, 5), 0.0);
  EXPECT_THROW(ks_lower_bound(1.2, 5), InvalidInput);

  const std::vector<double> grid{0.0, 1.0, 2.0};
  const double d = ks_distance([](double x) { return x / 2.0; },
                               [](double x) { return x * x / 4.0; }, grid);
  EXPECT_DOUBLE_EQ(d, 0.25);
  EXPECT_THROW(ks_distance([](double) { return 0.0; }, [](double) { return 0.0; },
                           std::span<const double>{}),
               InvalidInput);
}
