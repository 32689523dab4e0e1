#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "meanmax/distributions.hpp"
#include "oracles.hpp"

using namespace meanmax;

TEST(DiscreteDistribution, ValidatesShape) {
  auto expect_code = [](auto&& make, InputErrc code) {
    try {
      make();
      ADD_FAILURE() << "no throw";
    } catch (const InvalidInput& e) {
      EXPECT_EQ(e.code(), code);
    }
  };
  expect_code([] { DiscreteDistribution({}, {}); }, InputErrc::bad_distribution);
  expect_code([] { DiscreteDistribution({1.0, 2.0}, {1.0}); }, InputErrc::bad_distribution);
  expect_code([] { DiscreteDistribution({2.0, 1.0}, {0.5, 0.5}); }, InputErrc::bad_distribution);
  expect_code([] { DiscreteDistribution({1.0, 2.0}, {0.6, 0.6}); }, InputErrc::bad_distribution);
  expect_code([] { DiscreteDistribution({1.0, 2.0}, {1.5, -0.5}); }, InputErrc::bad_distribution);
  expect_code([] { DiscreteDistribution({1.0, NAN}, {0.5, 0.5}); }, InputErrc::non_finite_value);
}

TEST(DiscreteDistribution, CdfMeanAndQuantileIndex) {
  const auto d = DiscreteDistribution::from_weights({1.0, 2.0, 4.0}, {1.0, 2.0, 1.0});
  EXPECT_EQ(d.cdf(0.5), 0.0);
  EXPECT_DOUBLE_EQ(d.cdf(1.0), 0.25);
  EXPECT_DOUBLE_EQ(d.cdf(3.9), 0.75);
  EXPECT_EQ(d.cdf(4.0), 1.0);
  EXPECT_DOUBLE_EQ(d.mean(), 2.25);
  EXPECT_EQ(d.quantile_index(0.0), 0U);
  EXPECT_EQ(d.quantile_index(0.2499), 0U);
  EXPECT_EQ(d.quantile_index(0.25), 1U);
  EXPECT_EQ(d.quantile_index(0.9999999), 2U);
  EXPECT_FALSE(d.is_degenerate());
  EXPECT_TRUE(DiscreteDistribution::point_mass(0.3).is_degenerate());
}

TEST(ExactExpectedMax, ClosedFormCases) {
  const auto d = DiscreteDistribution::uniform({1.0, 2.0, 3.0});
  EXPECT_NEAR(exact_expected_max(d, 2), 22.0 / 9.0, 1e-14);
  EXPECT_NEAR(exact_expected_max(d, 1), 2.0, 1e-14);
  EXPECT_EQ(exact_expected_max(DiscreteDistribution::point_mass(0.7), 9), 0.7);
  const auto coin = DiscreteDistribution::uniform({0.0, 1.0});
  EXPECT_DOUBLE_EQ(exact_expected_max(coin, 2), 0.75);
  EXPECT_THROW(exact_expected_max(d, 0), InvalidInput);
}

TEST(ExactExpectedMax, MatchesTupleEnumeration) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> support{-0.5, 0.1, 0.15, 0.9, 2.0};
    std::vector<double> w(support.size());
    for (auto& x : w) x = u(gen);
    const auto d = DiscreteDistribution::from_weights(support, w);
    const std::vector<double> mass(d.mass().begin(), d.mass().end());
    double previous = -INFINITY;
    for (std::size_t n = 1; n <= 6; ++n) {
      const double exact = exact_expected_max(d, n);
      EXPECT_NEAR(exact, meanmax::testing::tuple_expected_max(support, mass, n), 1e-12);
      EXPECT_GE(exact, previous);
      previous = exact;
    }
  }
}

TEST(MonteCarlo, AgreesWithExact) {
  const auto d = DiscreteDistribution::uniform({1.0, 2.0, 3.0});
  const double mc = mc_expected_max(d, 2, 200000, RngStream(5));
  EXPECT_NEAR(mc, 22.0 / 9.0, 0.01);
  EXPECT_EQ(mc, mc_expected_max(d, 2, 200000, RngStream(5)));
}

TEST(Sampling, FrequenciesFollowMass) {
  const auto d = DiscreteDistribution::from_weights({0.0, 1.0, 2.0}, {0.2, 0.5, 0.3});
  RngStream rng(17);
  const auto s = draw_sample(d, 100000, rng);
  std::array<double, 3> counts{};
  for (double v : s.ingestion_order()) counts[static_cast<std::size_t>(v)] += 1.0;
  EXPECT_NEAR(counts[0] / 1e5, 0.2, 0.006);
  EXPECT_NEAR(counts[1] / 1e5, 0.5, 0.006);
  EXPECT_NEAR(counts[2] / 1e5, 0.3, 0.006);
}

TEST(Bandwidth, ParsesAndResolves) {
  EXPECT_TRUE(Bandwidth::parse("scott").is_scott());
  EXPECT_EQ(Bandwidth::parse("0.25").width(), 0.25);
  EXPECT_THROW(Bandwidth::parse("0"), InvalidInput);
  EXPECT_THROW(Bandwidth::parse("-1"), InvalidInput);
  EXPECT_THROW(Bandwidth::parse("wide"), InvalidInput);
  EXPECT_THROW(Bandwidth::parse("0.1x"), InvalidInput);

  const ScoreSample runs({0.1, 0.2, 0.3, 0.4, 0.5});
  EXPECT_NEAR(Bandwidth::scott().resolve(runs), runs.stddev() * std::pow(5.0, -0.2), 1e-15);
  try {
    Bandwidth::scott().resolve(ScoreSample({0.5, 0.5, 0.5}));
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_EQ(e.code(), InputErrc::degenerate_bandwidth);
  }
  EXPECT_EQ(Bandwidth::fixed(0.1).resolve(ScoreSample({0.5, 0.5})), 0.1);
}

TEST(Kde, MatchesDirectDensityEvaluation) {
  const ScoreSample runs({0.71, 0.74, 0.745, 0.76, 0.8});
  const KdeSpec spec{Bandwidth::fixed(0.02), 0.6, 0.9, 31};
  const auto d = fit_kde(runs, spec);
  ASSERT_EQ(d.size(), 31U);

  std::vector<double> dens(31);
  const double width = 0.3 / 31;
  for (std::size_t k = 0; k < 31; ++k) {
    const double c = 0.6 + (k + 0.5) * width;
    EXPECT_NEAR(d.support()[k], c, 1e-14);
    for (double v : runs.ingestion_order()) dens[k] += std::exp(-0.5 * std::pow((c - v) / 0.02, 2));
  }
  const double total = std::accumulate(dens.begin(), dens.end(), 0.0);
  for (std::size_t k = 0; k < 31; ++k) EXPECT_NEAR(d.mass()[k], dens[k] / total, 1e-13);
}

TEST(Kde, FarBinsStayFiniteAndMassSumsToOne) {
  const ScoreSample runs({0.5, 0.52});
  const auto d = fit_kde(runs, {Bandwidth::fixed(0.001), 0.0, 1.0, 511});
  EXPECT_NEAR(std::accumulate(d.mass().begin(), d.mass().end(), 0.0), 1.0, 1e-12);
  EXPECT_NEAR(d.mean(), 0.51, 0.002);
  EXPECT_EQ(d.cumulative().back(), 1.0);
}

TEST(Kde, RejectsBadSpecs) {
  const ScoreSample runs({0.5, 0.6});
  EXPECT_THROW(fit_kde(runs, {Bandwidth::fixed(0.1), 1.0, 0.0, 10}), InvalidInput);
  EXPECT_THROW(fit_kde(runs, {Bandwidth::fixed(0.1), 0.0, 1.0, 1}), InvalidInput);
  EXPECT_THROW(fit_kde(ScoreSample({0.5, 0.5}), {Bandwidth::scott(), 0.0, 1.0, 10}), InvalidInput);
}

TEST(Presets, AreComplete) {
  const auto& mlp = find_preset("mlp");
  EXPECT_EQ(mlp.runs, 145U);
  EXPECT_EQ(mlp.bandwidth, 0.0049);
  EXPECT_EQ(find_preset("lstm").support_lo, -0.18);
  EXPECT_EQ(find_preset("glove").bandwidth, 0.018);
  EXPECT_EQ(find_preset("elmo").support_hi, 0.99);
  for (const auto& p : kKdePresets) EXPECT_EQ(p.bins, 511U);
  EXPECT_THROW(find_preset("bert"), InvalidInput);
}

TEST(Synthetic, QuantileGridWithOptionalTail) {
  const SyntheticShape body{0.7, 0.02, 1.0, 2.0};
  const auto runs = synthetic_runs(body, 101);
  EXPECT_TRUE(std::is_sorted(runs.begin(), runs.end()));
  EXPECT_NEAR(runs[50], 0.7, 1e-12);
  EXPECT_NEAR(runs[0] + runs[100], 1.4, 1e-12);

  const SyntheticShape tailed{0.7, 0.02, 0.9, 2.0};
  const auto heavy = synthetic_runs(tailed, 101);
  EXPECT_TRUE(std::is_sorted(heavy.begin(), heavy.end()));
  EXPECT_EQ(heavy[50], runs[50]);
  EXPECT_GT(heavy[100], runs[100]);
  // The spliced tail is continuous at the splice point.
  EXPECT_NEAR(tailed.quantile(0.9 + 1e-9), tailed.quantile(0.9), 1e-7);
  EXPECT_THROW(synthetic_runs({0.7, 0.0, 1.0, 2.0}, 5), InvalidInput);
}
