#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "interval.hpp"
#include "score_sample.hpp"

namespace meanmax {

// Estimators of theta_n = E[max of n i.i.d. scores] from a sample of size B.
//
// Both linear estimators are weighted sums over the order statistics
// v(1) <= ... <= v(B):
//
//   meanmax   w_j = (j/B)^n - ((j-1)/B)^n           (plug-in, V-statistic)
//   unbiased  w_j = C(j-1, n-1) / C(B, n)            (U-statistic)
//
// The prefix variant applies the plug-in formula to the first n scores in
// ingestion order only.

enum class EstimatorKind {
  meanmax,
  meanmax_prefix,
  unbiased,
};

inline std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::meanmax:
      return "meanmax";
    case EstimatorKind::meanmax_prefix:
      return "meanmax-prefix";
    case EstimatorKind::unbiased:
      return "unbiased";
  }
  return "unknown";
}

inline EstimatorKind parse_estimator_kind(std::string_view name) {
  if (name == "meanmax") return EstimatorKind::meanmax;
  if (name == "meanmax-prefix") return EstimatorKind::meanmax_prefix;
  if (name == "unbiased") return EstimatorKind::unbiased;
  throw InvalidInput(InputErrc::unknown_name,
                     "unknown estimator '" + std::string(name) +
                         "' (expected meanmax, meanmax-prefix or unbiased)");
}

/// True when the estimator only accepts budgets n <= B.
inline bool requires_budget_within_sample(EstimatorKind kind) {
  return kind != EstimatorKind::meanmax;
}

namespace detail {

inline void check_budget(std::size_t n) {
  if (n < 1) {
    throw InvalidInput(InputErrc::budget_below_one, "budget n must be at least 1");
  }
}

inline void check_budget_within(std::size_t n, std::size_t sample_size) {
  check_budget(n);
  if (n > sample_size) {
    throw InvalidInput(InputErrc::budget_exceeds_sample,
                       "budget n = " + std::to_string(n) + " exceeds sample size B = " +
                           std::to_string(sample_size));
  }
}

// Sum of w_j * v_j over an ascending sequence. Evaluated as offsets from the
// minimum so a constant sample returns its value exactly, and clamped to the
// sample range to absorb rounding in the weights.
inline double apply_weights(std::span<const double> sorted, std::span<const double> weights) {
  const double lo = sorted.front();
  const double hi = sorted.back();
  double acc = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    if (weights[j] != 0.0) acc += weights[j] * (sorted[j] - lo);
  }
  return std::clamp(lo + acc, lo, hi);
}

}  // namespace detail

/// Plug-in weights (j/B)^n - ((j-1)/B)^n for j = 1..B. Any n >= 1 is valid.
inline std::vector<double> meanmax_weights(std::size_t sample_size, std::size_t n) {
  detail::check_budget(n);
  if (sample_size == 0) {
    throw InvalidInput(InputErrc::empty_sample, "sample size must be positive");
  }
  const double b = static_cast<double>(sample_size);
  if (n == 1) return std::vector<double>(sample_size, 1.0 / b);
  std::vector<double> w(sample_size);
  const double power = static_cast<double>(n);
  double previous = 0.0;
  for (std::size_t j = 1; j <= sample_size; ++j) {
    const double current = j == sample_size ? 1.0 : std::pow(static_cast<double>(j) / b, power);
    w[j - 1] = current - previous;
    previous = current;
  }
  return w;
}

/// Subset weights C(j-1, n-1) / C(B, n) for j = 1..B, requires n <= B.
///
/// Built downward from w_B = n / B with w_{j-1} = w_j (j - n) / (j - 1), so
/// no binomial coefficient is ever formed. Weights below j = n are zero.
inline std::vector<double> unbiased_weights(std::size_t sample_size, std::size_t n) {
  detail::check_budget_within(n, sample_size);
  std::vector<double> w(sample_size, 0.0);
  double current = static_cast<double>(n) / static_cast<double>(sample_size);
  for (std::size_t j = sample_size; j >= n; --j) {
    w[j - 1] = current;
    if (j == n || j == 1) break;
    current *= static_cast<double>(j - n) / static_cast<double>(j - 1);
  }
  return w;
}

inline double meanmax_v(const ScoreSample& sample, std::size_t n) {
  const auto w = meanmax_weights(sample.size(), n);
  return detail::apply_weights(sample.sorted(), w);
}

inline double unbiased_u(const ScoreSample& sample, std::size_t n) {
  const auto w = unbiased_weights(sample.size(), n);
  return detail::apply_weights(sample.sorted(), w);
}

/// Plug-in estimate computed from the first n scores in ingestion order.
inline double meanmax_prefix(const ScoreSample& sample, std::size_t n) {
  detail::check_budget_within(n, sample.size());
  const auto order = sample.ingestion_order();
  std::vector<double> prefix(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n));
  std::sort(prefix.begin(), prefix.end());
  return detail::apply_weights(prefix, meanmax_weights(n, n));
}

inline double estimate(const ScoreSample& sample, EstimatorKind kind, std::size_t n) {
  switch (kind) {
    case EstimatorKind::meanmax:
      return meanmax_v(sample, n);
    case EstimatorKind::meanmax_prefix:
      return meanmax_prefix(sample, n);
    case EstimatorKind::unbiased:
      return unbiased_u(sample, n);
  }
  throw InvalidInput(InputErrc::unknown_name, "unknown estimator kind");
}

/// (ECDF(x))^n, the plug-in CDF of the maximum of n draws.
inline double ecdf_pow(const ScoreSample& sample, double x, std::size_t n) {
  detail::check_budget(n);
  const auto sorted = sample.sorted();
  const auto at_or_below = std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin();
  if (at_or_below == 0) return 0.0;
  if (static_cast<std::size_t>(at_or_below) == sorted.size()) return 1.0;
  return std::pow(static_cast<double>(at_or_below) / static_cast<double>(sorted.size()),
                  static_cast<double>(n));
}

/// Largest |a(x) - b(x)| over `grid`. Exact for step functions when the grid
/// holds every jump point of both.
template <typename CdfA, typename CdfB>
double ks_distance(CdfA&& cdf_a, CdfB&& cdf_b, std::span<const double> grid) {
  if (grid.empty()) {
    throw InvalidInput(InputErrc::empty_sample, "KS distance needs a non-empty grid");
  }
  double worst = 0.0;
  for (double x : grid) {
    worst = std::max(worst, std::abs(cdf_a(x) - cdf_b(x)));
  }
  return worst;
}

/// 1 - F(v_B)^n: how far the n-th power ECDF must sit from the true F^n
/// when the sample misses the population maximum.
inline double ks_lower_bound(double true_cdf_at_sample_max, std::size_t n) {
  detail::check_budget(n);
  if (!(true_cdf_at_sample_max >= 0.0 && true_cdf_at_sample_max <= 1.0)) {
    throw InvalidInput(InputErrc::out_of_range, "CDF value must lie in [0, 1]");
  }
  return 1.0 - std::pow(true_cdf_at_sample_max, static_cast<double>(n));
}

inline double ks_lower_bound(const ScoreSample&, double true_cdf_at_sample_max, std::size_t n) {
  return ks_lower_bound(true_cdf_at_sample_max, n);
}

struct CurvePoint {
  std::size_t n = 0;
  double estimate = 0.0;
  std::optional<Interval> ci;

  bool operator==(const CurvePoint&) const = default;
};

/// Estimated expected maximum per budget n.
struct ExpectedMaxCurve {
  EstimatorKind estimator = EstimatorKind::meanmax;
  std::size_t sample_size = 0;
  std::vector<CurvePoint> points;

  bool operator==(const ExpectedMaxCurve&) const = default;
};

inline ExpectedMaxCurve expected_max_curve(const ScoreSample& sample, EstimatorKind kind,
                                           std::size_t n_max) {
  if (requires_budget_within_sample(kind)) {
    detail::check_budget_within(n_max, sample.size());
  } else {
    detail::check_budget(n_max);
  }
  ExpectedMaxCurve curve;
  curve.estimator = kind;
  curve.sample_size = sample.size();
  curve.points.reserve(n_max);
  for (std::size_t n = 1; n <= n_max; ++n) {
    curve.points.push_back({n, estimate(sample, kind, n), std::nullopt});
  }
  return curve;
}

}  // namespace meanmax
