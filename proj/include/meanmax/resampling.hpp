#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "error.hpp"
#include "estimators.hpp"
#include "interval.hpp"
#include "rng.hpp"
#include "score_sample.hpp"
#include "special_functions.hpp"

namespace meanmax {

struct BootstrapConfig {
  std::size_t resamples = 5000;
  double confidence = 0.95;
  RngStream rng{};

  void validate() const {
    if (resamples < 1) throw InvalidInput(InputErrc::out_of_range, "resamples must be positive");
    if (!(confidence > 0.0 && confidence < 1.0)) {
      throw InvalidInput(InputErrc::out_of_range, "confidence must lie strictly between 0 and 1");
    }
  }
};

/// Linear-interpolation percentile ("type 7"): position q (m - 1) in the
/// sorted values, interpolating between the two neighbouring ranks.
inline double percentile(std::span<const double> values, double q) {
  if (values.empty()) {
    throw InvalidInput(InputErrc::empty_sample, "percentile of an empty list");
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    throw InvalidInput(InputErrc::out_of_range, "percentile level must lie in [0, 1]");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double position = q * static_cast<double>(sorted.size() - 1);
  const auto index = static_cast<std::size_t>(std::floor(position));
  const double frac = position - static_cast<double>(index);
  if (index + 1 >= sorted.size() || frac == 0.0) return sorted[index];
  return sorted[index] + frac * (sorted[index + 1] - sorted[index]);
}

namespace detail {

// Estimator values over `resamples` size-B resamples drawn with replacement
// from the sorted sample. Linear estimators rebuild each resample already in
// order from index counts; the prefix estimator sees the draw order.
inline std::vector<double> bootstrap_statistics(std::span<const double> sorted,
                                                EstimatorKind kind, std::size_t n,
                                                std::size_t resamples, RngStream rng) {
  const std::size_t b = sorted.size();
  std::vector<double> stats(resamples);
  std::vector<double> buffer(b);

  if (kind == EstimatorKind::meanmax_prefix) {
    const auto weights = meanmax_weights(n, n);
    std::vector<double> prefix(n);
    for (std::size_t r = 0; r < resamples; ++r) {
      for (std::size_t i = 0; i < b; ++i) buffer[i] = sorted[rng.uniform_index(b)];
      std::copy_n(buffer.begin(), n, prefix.begin());
      std::sort(prefix.begin(), prefix.end());
      stats[r] = apply_weights(prefix, weights);
    }
    return stats;
  }

  const auto weights =
      kind == EstimatorKind::unbiased ? unbiased_weights(b, n) : meanmax_weights(b, n);
  std::vector<std::uint32_t> counts(b);
  for (std::size_t r = 0; r < resamples; ++r) {
    std::fill(counts.begin(), counts.end(), 0U);
    for (std::size_t i = 0; i < b; ++i) ++counts[rng.uniform_index(b)];
    std::size_t pos = 0;
    for (std::size_t i = 0; i < b; ++i) {
      for (std::uint32_t c = 0; c < counts[i]; ++c) buffer[pos++] = sorted[i];
    }
    stats[r] = apply_weights(buffer, weights);
  }
  return stats;
}

}  // namespace detail

/// Percentile bootstrap CI for the budget-n estimate.
inline Interval percentile_bootstrap_ci(const ScoreSample& sample, EstimatorKind kind,
                                        std::size_t n, const BootstrapConfig& config) {
  config.validate();
  if (requires_budget_within_sample(kind)) {
    detail::check_budget_within(n, sample.size());
  } else {
    detail::check_budget(n);
  }
  const auto stats =
      detail::bootstrap_statistics(sample.sorted(), kind, n, config.resamples, config.rng);
  const double alpha = 1.0 - config.confidence;
  return {percentile(stats, alpha / 2.0), percentile(stats, 1.0 - alpha / 2.0)};
}

/// Attaches bootstrap CIs to every point of `curve`, one child stream per n.
inline ExpectedMaxCurve with_bootstrap_cis(ExpectedMaxCurve curve, const ScoreSample& sample,
                                           const BootstrapConfig& config) {
  for (auto& point : curve.points) {
    BootstrapConfig per_point = config;
    per_point.rng = config.rng.child(point.n);
    point.ci = percentile_bootstrap_ci(sample, curve.estimator, point.n, per_point);
  }
  return curve;
}

/// Exact (Clopper-Pearson) binomial interval from beta quantiles.
inline Interval clopper_pearson(std::size_t successes, std::size_t trials, double confidence) {
  if (trials < 1) throw InvalidInput(InputErrc::out_of_range, "trials must be positive");
  if (successes > trials) {
    throw InvalidInput(InputErrc::out_of_range, "successes exceed trials");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw InvalidInput(InputErrc::out_of_range, "confidence must lie strictly between 0 and 1");
  }
  const double alpha = 1.0 - confidence;
  const auto k = static_cast<double>(successes);
  const auto m = static_cast<double>(trials);
  const double lo =
      successes == 0 ? 0.0 : special::inverse_incomplete_beta(k, m - k + 1.0, alpha / 2.0);
  const double hi =
      successes == trials ? 1.0 : special::inverse_incomplete_beta(k + 1.0, m - k, 1.0 - alpha / 2.0);
  return {lo, hi};
}

}  // namespace meanmax
