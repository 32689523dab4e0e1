#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "meanmax/experiments.hpp"

using namespace meanmax;

namespace {

const DiscreteDistribution& small_dist() {
  static const auto d =
      DiscreteDistribution::from_weights({0.60, 0.65, 0.70, 0.72, 0.80, 0.95}, {5, 8, 6, 4, 2, 1});
  return d;
}

}  // namespace

TEST(Probe, ShapeTruthAndIntervals) {
  const auto report = probe(small_dist(), 20, 12, 200, EstimatorKind::meanmax, RngStream(1), {}, "small");
  EXPECT_EQ(report.distribution_id, "small");
  EXPECT_EQ(report.sample_size, 20U);
  ASSERT_EQ(report.rows.size(), 12U);
  for (std::size_t i = 0; i < 12; ++i) {
    const auto& row = report.rows[i];
    EXPECT_EQ(row.n, i + 1);
    EXPECT_EQ(row.samples, 200U);
    EXPECT_DOUBLE_EQ(row.proportion, row.underestimates / 200.0);
    EXPECT_EQ(row.ci, clopper_pearson(row.underestimates, 200, 0.95));
    EXPECT_DOUBLE_EQ(row.truth, exact_expected_max(small_dist(), row.n));
  }
}

TEST(Probe, CountsOnlyStrictUnderestimates) {
  const auto point = DiscreteDistribution::point_mass(0.8);
  for (auto kind : {EstimatorKind::meanmax, EstimatorKind::unbiased, EstimatorKind::meanmax_prefix}) {
    const auto report = probe(point, 10, 10, 50, kind, RngStream(2));
    for (const auto& row : report.rows) EXPECT_EQ(row.underestimates, 0U);
  }
}

TEST(Probe, MatchesExplicitReplay) {
  const RngStream rng(5);
  const auto report = probe(small_dist(), 15, 6, 40, EstimatorKind::unbiased, rng);
  for (const auto& row : report.rows) {
    std::size_t under = 0;
    for (std::size_t i = 0; i < 40; ++i) {
      RngStream stream = rng.child(row.n).child(i);
      const auto s = draw_sample(small_dist(), 15, stream);
      if (unbiased_u(s, row.n) < row.truth) ++under;
    }
    EXPECT_EQ(row.underestimates, under) << "n=" << row.n;
  }
}

TEST(Probe, ThreadCountDoesNotChangeResults) {
  for (auto kind : {EstimatorKind::meanmax, EstimatorKind::meanmax_prefix}) {
    const auto one = probe(small_dist(), 25, 25, 120, kind, RngStream(9), {1, std::nullopt});
    const auto four = probe(small_dist(), 25, 25, 120, kind, RngStream(9), {4, std::nullopt});
    EXPECT_EQ(one, four);
  }
}

TEST(Probe, BudgetChecks) {
  EXPECT_THROW(probe(small_dist(), 10, 11, 5, EstimatorKind::unbiased, RngStream()), InvalidInput);
  EXPECT_THROW(probe(small_dist(), 10, 11, 5, EstimatorKind::meanmax_prefix, RngStream()), InvalidInput);
  EXPECT_NO_THROW(probe(small_dist(), 10, 11, 5, EstimatorKind::meanmax, RngStream()));
  EXPECT_THROW(probe(small_dist(), 10, 0, 5, EstimatorKind::meanmax, RngStream()), InvalidInput);
  EXPECT_THROW(probe(small_dist(), 10, 5, 0, EstimatorKind::meanmax, RngStream()), InvalidInput);
}

TEST(Probe, MonteCarloTruthOption) {
  const auto report =
      probe(small_dist(), 10, 4, 10, EstimatorKind::meanmax, RngStream(3), {1, std::size_t{200000}});
  for (const auto& row : report.rows) {
    EXPECT_NEAR(row.truth, exact_expected_max(small_dist(), row.n), 0.002);
    EXPECT_NE(row.truth, exact_expected_max(small_dist(), row.n));
  }
}

TEST(Coverage, ClosedIntervalsCoverPointMass) {
  const auto point = DiscreteDistribution::point_mass(0.5);
  const BootstrapConfig boot{50, 0.95, RngStream(1)};
  const auto report = coverage(point, 8, 8, 20, boot, EstimatorKind::meanmax, RngStream(2));
  ASSERT_EQ(report.rows.size(), 8U);
  for (const auto& row : report.rows) {
    EXPECT_EQ(row.hits, 20U);
    EXPECT_EQ(row.ecp, 1.0);
  }
  EXPECT_EQ(report.nominal, 0.95);
  EXPECT_EQ(report.resamples, 50U);
}

TEST(Coverage, MatchesExplicitReplayAndIsThreadInvariant) {
  const RngStream rng(12);
  const BootstrapConfig boot{100, 0.9, RngStream(13)};
  const auto report = coverage(small_dist(), 12, 5, 30, boot, EstimatorKind::meanmax, rng);
  EXPECT_EQ(report, coverage(small_dist(), 12, 5, 30, boot, EstimatorKind::meanmax, rng, {3, std::nullopt}));
  for (const auto& row : report.rows) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < 30; ++i) {
      RngStream stream = rng.child(row.n).child(i);
      const auto s = draw_sample(small_dist(), 12, stream);
      BootstrapConfig per = boot;
      per.rng = boot.rng.child(row.n).child(i);
      if (percentile_bootstrap_ci(s, EstimatorKind::meanmax, row.n, per).contains(row.truth)) ++hits;
    }
    EXPECT_EQ(row.hits, hits) << "n=" << row.n;
  }
}

TEST(Curves, AveragesAgainstTruth) {
  const std::vector<NamedDistribution> dists{{"small", small_dist()},
                                             {"point", DiscreteDistribution::point_mass(0.7)}};
  const auto report = curves(dists, 12, 3000, EstimatorKind::unbiased, RngStream(4));
  ASSERT_EQ(report.models.size(), 2U);
  const auto& m = report.model("small");
  ASSERT_EQ(m.averaged.points.size(), 12U);
  for (std::size_t k = 0; k < 12; ++k) {
    EXPECT_DOUBLE_EQ(m.truth[k], exact_expected_max(small_dist(), k + 1));
    EXPECT_NEAR(m.averaged.points[k].estimate, m.truth[k], 5 * m.std_error[k] + 1e-12);
  }
  for (double se : report.model("point").std_error) EXPECT_LT(se, 1e-12);
  EXPECT_THROW(report.model("missing"), InvalidInput);

  const auto v = curves(dists, 12, 3000, EstimatorKind::meanmax, RngStream(4), {2, std::nullopt});
  EXPECT_LT(v.model("small").averaged.points[11].estimate, v.model("small").truth[11]);
  EXPECT_EQ(v, curves(dists, 12, 3000, EstimatorKind::meanmax, RngStream(4)));
}

TEST(FailureScan, ReportsStrictSignDisagreements) {
  auto model = [](std::string name, std::vector<double> est, std::vector<double> truth) {
    ModelCurve m;
    m.name = std::move(name);
    m.averaged.estimator = EstimatorKind::meanmax;
    for (std::size_t k = 0; k < est.size(); ++k) m.averaged.points.push_back({k + 1, est[k], std::nullopt});
    m.std_error.assign(est.size(), 0.0);
    m.truth = std::move(truth);
    return m;
  };
  CurveReport report;
  report.models.push_back(model("a", {1.0, 2.0, 3.0, 4.0}, {1.0, 2.0, 3.0, 4.0}));
  report.models.push_back(model("b", {0.5, 2.5, 2.9, 4.0}, {0.5, 1.5, 3.5, 5.0}));
  const auto inversions = failure_scan(report, "a", "b");
  ASSERT_EQ(inversions.size(), 2U);
  EXPECT_EQ(inversions[0], (Inversion{2, "a", "b"}));
  EXPECT_EQ(inversions[1], (Inversion{3, "b", "a"}));
  EXPECT_TRUE(failure_scan(report, "a", "a").empty());
  EXPECT_THROW(failure_scan(report, "a", "c"), InvalidInput);

  report.models[1].averaged.points.pop_back();
  EXPECT_THROW(failure_scan(report, "a", "b"), InvalidInput);
}
