#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "distributions.hpp"
#include "error.hpp"
#include "estimators.hpp"
#include "interval.hpp"
#include "parallel.hpp"
#include "resampling.hpp"
#include "rng.hpp"

// Simulation batteries run against a known ground-truth distribution.
//
// Randomness layout (fixed, so results do not depend on thread count):
//   probe / coverage   sample i at budget n     rng.child(n).child(i)
//   coverage           its bootstrap resamples  boot.rng.child(n).child(i)
//   curves             sample i of model d      rng.child(d + 1).child(i)
//   Monte Carlo truth  budget n                 rng.child(0).child(n)

namespace meanmax {

struct ExperimentOptions {
  unsigned threads = 1;
  // When set, theta_n comes from this many Monte Carlo iterations instead of
  // the closed form.
  std::optional<std::size_t> mc_truth_iterations;
};

struct ProbeRow {
  std::size_t n = 0;
  std::size_t underestimates = 0;
  std::size_t samples = 0;
  double proportion = 0.0;
  Interval ci;
  double truth = 0.0;

  bool operator==(const ProbeRow&) const = default;
};

/// How often an estimator lands strictly below theta_n.
struct ProbeReport {
  std::string distribution_id;
  std::size_t sample_size = 0;
  EstimatorKind estimator = EstimatorKind::meanmax;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::vector<ProbeRow> rows;

  bool operator==(const ProbeReport&) const = default;
};

struct CoverageRow {
  std::size_t n = 0;
  std::size_t hits = 0;
  std::size_t trials = 0;
  double ecp = 0.0;
  Interval ci;
  double truth = 0.0;

  bool operator==(const CoverageRow&) const = default;
};

/// Empirical coverage of percentile-bootstrap CIs for theta_n.
struct CoverageReport {
  std::string distribution_id;
  std::size_t sample_size = 0;
  std::size_t resamples = 0;
  double nominal = 0.95;
  EstimatorKind estimator = EstimatorKind::meanmax;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::vector<CoverageRow> rows;

  bool operator==(const CoverageReport&) const = default;
};

struct ModelCurve {
  std::string name;
  ExpectedMaxCurve averaged;
  std::vector<double> std_error;
  std::vector<double> truth;

  bool operator==(const ModelCurve&) const = default;
};

/// Vertically averaged estimated curves next to the exact curves.
struct CurveReport {
  std::size_t sample_size = 0;
  std::size_t samples = 0;
  EstimatorKind estimator = EstimatorKind::meanmax;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::vector<ModelCurve> models;

  const ModelCurve& model(const std::string& name) const {
    for (const auto& m : models) {
      if (m.name == name) return m;
    }
    throw InvalidInput(InputErrc::unknown_name, "no model named '" + name + "' in report");
  }

  bool operator==(const CurveReport&) const = default;
};

struct NamedDistribution {
  std::string name;
  DiscreteDistribution dist;
};

/// One budget at which estimated and true orderings disagree.
struct Inversion {
  std::size_t n = 0;
  std::string true_leader;
  std::string estimated_leader;

  bool operator==(const Inversion&) const = default;
};

namespace detail {

inline void check_experiment_budget(EstimatorKind kind, std::size_t sample_size,
                                    std::size_t n_max) {
  if (sample_size < 1) throw InvalidInput(InputErrc::empty_sample, "sample size B must be positive");
  if (requires_budget_within_sample(kind)) {
    check_budget_within(n_max, sample_size);
  } else {
    check_budget(n_max);
  }
}

inline std::vector<double> true_curve(const DiscreteDistribution& dist, std::size_t n_max,
                                      const RngStream& rng, const ExperimentOptions& options) {
  std::vector<double> truth(n_max);
  for (std::size_t n = 1; n <= n_max; ++n) {
    truth[n - 1] = options.mc_truth_iterations
                       ? mc_expected_max(dist, n, *options.mc_truth_iterations,
                                         rng.child(0).child(n))
                       : exact_expected_max(dist, n);
  }
  return truth;
}

// Evaluates one estimator over many freshly drawn samples without building a
// ScoreSample per draw.
class SampleEvaluator {
 public:
  SampleEvaluator(EstimatorKind kind, std::size_t sample_size, std::size_t n_max)
      : kind_(kind), sample_size_(sample_size) {
    if (kind == EstimatorKind::meanmax_prefix) return;
    weights_.reserve(n_max);
    for (std::size_t n = 1; n <= n_max; ++n) {
      weights_.push_back(kind == EstimatorKind::unbiased ? unbiased_weights(sample_size, n)
                                                         : meanmax_weights(sample_size, n));
    }
  }

  // `draws` is in draw order; it is sorted in place for the linear kinds.
  double operator()(std::vector<double>& draws, std::size_t n) const {
    if (kind_ == EstimatorKind::meanmax_prefix) {
      std::vector<double> prefix(draws.begin(), draws.begin() + static_cast<std::ptrdiff_t>(n));
      std::sort(prefix.begin(), prefix.end());
      return apply_weights(prefix, meanmax_weights(n, n));
    }
    if (!std::is_sorted(draws.begin(), draws.end())) std::sort(draws.begin(), draws.end());
    return apply_weights(draws, weights_[n - 1]);
  }

  std::size_t sample_size() const noexcept { return sample_size_; }

 private:
  EstimatorKind kind_;
  std::size_t sample_size_;
  std::vector<std::vector<double>> weights_;
};

}  // namespace detail

inline ProbeReport probe(const DiscreteDistribution& dist, std::size_t sample_size,
                         std::size_t n_max, std::size_t num_samples, EstimatorKind kind,
                         const RngStream& rng, const ExperimentOptions& options = {},
                         std::string distribution_id = "") {
  detail::check_experiment_budget(kind, sample_size, n_max);
  if (num_samples < 1) throw InvalidInput(InputErrc::out_of_range, "sample count must be positive");

  const auto truth = detail::true_curve(dist, n_max, rng, options);
  const detail::SampleEvaluator evaluate(kind, sample_size, n_max);

  std::vector<char> under(n_max * num_samples, 0);
  detail::parallel_for(under.size(), options.threads, [&](std::size_t item) {
    const std::size_t n = item / num_samples + 1;
    const std::size_t i = item % num_samples;
    RngStream stream = rng.child(n).child(i);
    std::vector<double> draws(sample_size);
    detail::draw_into(dist, stream, draws);
    under[item] = evaluate(draws, n) < truth[n - 1] ? 1 : 0;
  });

  ProbeReport report;
  report.distribution_id = std::move(distribution_id);
  report.sample_size = sample_size;
  report.estimator = kind;
  report.seed = rng.seed();
  report.stream = rng.stream();
  for (std::size_t n = 1; n <= n_max; ++n) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < num_samples; ++i) count += under[(n - 1) * num_samples + i];
    report.rows.push_back({n, count, num_samples,
                           static_cast<double>(count) / static_cast<double>(num_samples),
                           clopper_pearson(count, num_samples, 0.95), truth[n - 1]});
  }
  return report;
}

inline CoverageReport coverage(const DiscreteDistribution& dist, std::size_t sample_size,
                               std::size_t n_max, std::size_t trials,
                               const BootstrapConfig& boot, EstimatorKind kind,
                               const RngStream& rng, const ExperimentOptions& options = {},
                               std::string distribution_id = "") {
  detail::check_experiment_budget(kind, sample_size, n_max);
  boot.validate();
  if (trials < 1) throw InvalidInput(InputErrc::out_of_range, "M must be positive");

  const auto truth = detail::true_curve(dist, n_max, rng, options);
  const double alpha = 1.0 - boot.confidence;

  std::vector<char> hit(n_max * trials, 0);
  detail::parallel_for(hit.size(), options.threads, [&](std::size_t item) {
    const std::size_t n = item / trials + 1;
    const std::size_t i = item % trials;
    RngStream stream = rng.child(n).child(i);
    std::vector<double> draws(sample_size);
    detail::draw_into(dist, stream, draws);
    std::sort(draws.begin(), draws.end());
    const auto stats = detail::bootstrap_statistics(draws, kind, n, boot.resamples,
                                                    boot.rng.child(n).child(i));
    const Interval ci{percentile(stats, alpha / 2.0), percentile(stats, 1.0 - alpha / 2.0)};
    hit[item] = ci.contains(truth[n - 1]) ? 1 : 0;
  });

  CoverageReport report;
  report.distribution_id = std::move(distribution_id);
  report.sample_size = sample_size;
  report.resamples = boot.resamples;
  report.nominal = boot.confidence;
  report.estimator = kind;
  report.seed = rng.seed();
  report.stream = rng.stream();
  for (std::size_t n = 1; n <= n_max; ++n) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < trials; ++i) count += hit[(n - 1) * trials + i];
    report.rows.push_back({n, count, trials,
                           static_cast<double>(count) / static_cast<double>(trials),
                           clopper_pearson(count, trials, 0.95), truth[n - 1]});
  }
  return report;
}

inline CurveReport curves(const std::vector<NamedDistribution>& dists, std::size_t sample_size,
                          std::size_t num_samples, EstimatorKind kind, const RngStream& rng,
                          const ExperimentOptions& options = {}) {
  if (dists.empty()) throw InvalidInput(InputErrc::out_of_range, "need at least one distribution");
  if (num_samples < 1) throw InvalidInput(InputErrc::out_of_range, "sample count must be positive");
  detail::check_experiment_budget(kind, sample_size, sample_size);

  const std::size_t b = sample_size;
  const detail::SampleEvaluator evaluate(kind, b, b);
  std::vector<double> grid(dists.size() * num_samples * b);
  detail::parallel_for(dists.size() * num_samples, options.threads, [&](std::size_t item) {
    const std::size_t d = item / num_samples;
    const std::size_t i = item % num_samples;
    RngStream stream = rng.child(d + 1).child(i);
    std::vector<double> draws(b);
    detail::draw_into(dists[d].dist, stream, draws);
    for (std::size_t n = 1; n <= b; ++n) grid[item * b + (n - 1)] = evaluate(draws, n);
  });

  CurveReport report;
  report.sample_size = b;
  report.samples = num_samples;
  report.estimator = kind;
  report.seed = rng.seed();
  report.stream = rng.stream();
  const auto count = static_cast<double>(num_samples);
  for (std::size_t d = 0; d < dists.size(); ++d) {
    ModelCurve model;
    model.name = dists[d].name;
    model.averaged.estimator = kind;
    model.averaged.sample_size = b;
    model.truth = detail::true_curve(dists[d].dist, b, rng, options);
    for (std::size_t n = 1; n <= b; ++n) {
      double sum = 0.0;
      for (std::size_t i = 0; i < num_samples; ++i) sum += grid[(d * num_samples + i) * b + n - 1];
      const double mean = sum / count;
      double ss = 0.0;
      for (std::size_t i = 0; i < num_samples; ++i) {
        const double dev = grid[(d * num_samples + i) * b + n - 1] - mean;
        ss += dev * dev;
      }
      const double se = num_samples > 1 ? std::sqrt(ss / (count - 1.0) / count) : 0.0;
      model.averaged.points.push_back({n, mean, std::nullopt});
      model.std_error.push_back(se);
    }
    report.models.push_back(std::move(model));
  }
  return report;
}

/// Budgets where the averaged estimates rank the two models opposite to the
/// true curves. Exact ties on either side produce no row.
inline std::vector<Inversion> failure_scan(const CurveReport& report, const std::string& model_a,
                                           const std::string& model_b) {
  const auto& a = report.model(model_a);
  const auto& b = report.model(model_b);
  const auto& pa = a.averaged.points;
  const auto& pb = b.averaged.points;
  if (pa.size() != pb.size() || a.truth.size() != pa.size() || b.truth.size() != pb.size()) {
    throw InvalidInput(InputErrc::mismatched_grids, "models do not share an n grid");
  }
  std::vector<Inversion> out;
  for (std::size_t k = 0; k < pa.size(); ++k) {
    if (pa[k].n != pb[k].n) {
      throw InvalidInput(InputErrc::mismatched_grids, "models do not share an n grid");
    }
    const double true_gap = a.truth[k] - b.truth[k];
    const double est_gap = pa[k].estimate - pb[k].estimate;
    if (true_gap == 0.0 || est_gap == 0.0) continue;
    if ((true_gap > 0.0) != (est_gap > 0.0)) {
      out.push_back({pa[k].n, true_gap > 0.0 ? model_a : model_b,
                     est_gap > 0.0 ? model_a : model_b});
    }
  }
  return out;
}

}  // namespace meanmax
