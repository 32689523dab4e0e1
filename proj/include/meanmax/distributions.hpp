#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "rng.hpp"
#include "score_sample.hpp"
#include "special_functions.hpp"

namespace meanmax {

/// Finite-support ground truth: ascending support points with masses.
class DiscreteDistribution {
 public:
  /// Masses must already sum to 1 (within 1e-9); they are kept bit-for-bit
  /// unless the sum is off by more than 1e-12, in which case they are rescaled.
  DiscreteDistribution(std::vector<double> support, std::vector<double> mass)
      : support_(std::move(support)), mass_(std::move(mass)) {
    validate_shape();
    const double total = sum_mass();
    if (std::abs(total - 1.0) > 1e-9) {
      throw InvalidInput(InputErrc::bad_distribution,
                         "distribution masses sum to " + std::to_string(total) + ", not 1");
    }
    if (std::abs(total - 1.0) > 1e-12) rescale(total);
    build_cumulative();
  }

  /// Normalizes arbitrary non-negative weights with a positive total.
  static DiscreteDistribution from_weights(std::vector<double> support,
                                           std::vector<double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0) || !std::isfinite(total)) {
      throw InvalidInput(InputErrc::bad_distribution, "weights must have a positive finite total");
    }
    for (double& w : weights) w /= total;
    return DiscreteDistribution(std::move(support), std::move(weights));
  }

  static DiscreteDistribution point_mass(double value) {
    return DiscreteDistribution({value}, {1.0});
  }

  static DiscreteDistribution uniform(std::vector<double> support) {
    std::vector<double> weights(support.size(), 1.0);
    return from_weights(std::move(support), std::move(weights));
  }

  std::size_t size() const noexcept { return support_.size(); }
  std::span<const double> support() const noexcept { return support_; }
  std::span<const double> mass() const noexcept { return mass_; }
  std::span<const double> cumulative() const noexcept { return cumulative_; }

  double min() const noexcept { return support_.front(); }
  double max() const noexcept { return support_.back(); }

  /// P(X <= x).
  double cdf(double x) const noexcept {
    const auto it = std::upper_bound(support_.begin(), support_.end(), x);
    if (it == support_.begin()) return 0.0;
    return cumulative_[static_cast<std::size_t>(it - support_.begin()) - 1];
  }

  double mean() const noexcept {
    double acc = 0.0;
    for (std::size_t i = 0; i < size(); ++i) acc += mass_[i] * support_[i];
    return acc;
  }

  /// At least two support points carry positive mass.
  bool is_degenerate() const noexcept {
    return std::count_if(mass_.begin(), mass_.end(), [](double m) { return m > 0.0; }) < 2;
  }

  /// Index of the support point hit by uniform variate u in [0, 1).
  std::size_t quantile_index(double u) const noexcept {
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const auto idx = static_cast<std::size_t>(it - cumulative_.begin());
    return std::min(idx, size() - 1);
  }

  bool operator==(const DiscreteDistribution& other) const {
    return support_ == other.support_ && mass_ == other.mass_;
  }

 private:
  void validate_shape() const {
    if (support_.empty()) {
      throw InvalidInput(InputErrc::bad_distribution, "distribution needs at least one point");
    }
    if (support_.size() != mass_.size()) {
      throw InvalidInput(InputErrc::bad_distribution, "support and mass differ in length");
    }
    for (std::size_t i = 0; i < support_.size(); ++i) {
      if (!std::isfinite(support_[i]) || !std::isfinite(mass_[i])) {
        throw InvalidInput(InputErrc::non_finite_value, "distribution entries must be finite");
      }
      if (mass_[i] < 0.0) {
        throw InvalidInput(InputErrc::bad_distribution, "masses must be non-negative");
      }
      if (i > 0 && !(support_[i - 1] < support_[i])) {
        throw InvalidInput(InputErrc::bad_distribution, "support must be strictly increasing");
      }
    }
  }

  double sum_mass() const noexcept {
    double total = 0.0;
    for (double m : mass_) total += m;
    return total;
  }

  void rescale(double total) {
    for (double& m : mass_) m /= total;
  }

  void build_cumulative() {
    cumulative_.resize(mass_.size());
    double running = 0.0;
    for (std::size_t i = 0; i < mass_.size(); ++i) {
      running += mass_[i];
      cumulative_[i] = std::min(running, 1.0);
    }
    cumulative_.back() = 1.0;
  }

  std::vector<double> support_;
  std::vector<double> mass_;
  std::vector<double> cumulative_;
};

/// KDE bandwidth: an explicit width in score units, or Scott's rule.
class Bandwidth {
 public:
  static Bandwidth scott() { return Bandwidth(std::nullopt); }

  static Bandwidth fixed(double width) {
    if (!(width > 0.0) || !std::isfinite(width)) {
      throw InvalidInput(InputErrc::out_of_range, "bandwidth must be a positive finite number");
    }
    return Bandwidth(width);
  }

  /// "scott" or a positive number.
  static Bandwidth parse(std::string_view text) {
    if (text == "scott") return scott();
    try {
      std::size_t used = 0;
      const double value = std::stod(std::string(text), &used);
      if (used != text.size()) throw std::invalid_argument("trailing characters");
      return fixed(value);
    } catch (const InvalidInput&) {
      throw;
    } catch (const std::exception&) {
      throw InvalidInput(InputErrc::out_of_range,
                         "bandwidth must be 'scott' or a positive number, got '" +
                             std::string(text) + "'");
    }
  }

  bool is_scott() const noexcept { return !width_.has_value(); }
  std::optional<double> width() const noexcept { return width_; }

  /// Width for the given runs; Scott's rule is sd * B^(-1/5).
  double resolve(const ScoreSample& runs) const {
    if (width_) return *width_;
    const double h =
        runs.stddev() * std::pow(static_cast<double>(runs.size()), -1.0 / 5.0);
    if (!(h > 0.0)) {
      throw InvalidInput(InputErrc::degenerate_bandwidth,
                         "Scott's rule gives zero bandwidth for constant runs; "
                         "pass an explicit bandwidth");
    }
    return h;
  }

  bool operator==(const Bandwidth&) const = default;

 private:
  explicit Bandwidth(std::optional<double> width) : width_(width) {}
  std::optional<double> width_;
};

struct KdeSpec {
  Bandwidth bandwidth = Bandwidth::scott();
  double support_lo = 0.0;
  double support_hi = 1.0;
  std::size_t bins = 511;

  void validate() const {
    if (bins < 2) throw InvalidInput(InputErrc::out_of_range, "KDE needs at least 2 bins");
    if (!std::isfinite(support_lo) || !std::isfinite(support_hi) || !(support_lo < support_hi)) {
      throw InvalidInput(InputErrc::out_of_range, "KDE support needs finite lo < hi");
    }
  }
};

/// Named kernel settings: MLP and LSTM document classifiers, and GloVe- and
/// ELMo-fed LSTM sentiment classifiers. `runs` is the number of tuning runs
/// each kernel was fitted to; no run scores ship with the library.
struct KdePreset {
  std::string_view name;
  std::size_t runs;
  double bandwidth;
  double support_lo;
  double support_hi;
  std::size_t bins;

  KdeSpec spec() const { return {Bandwidth::fixed(bandwidth), support_lo, support_hi, bins}; }
};

inline constexpr std::array<KdePreset, 4> kKdePresets{{
    {"mlp", 145, 0.0049, 0.72, 0.82, 511},
    {"lstm", 152, 0.059, -0.18, 1.08, 511},
    {"glove", 114, 0.018, 0.46, 0.97, 511},
    {"elmo", 84, 0.041, 0.39, 0.99, 511},
}};

inline const KdePreset& find_preset(std::string_view name) {
  for (const auto& preset : kKdePresets) {
    if (preset.name == name) return preset;
  }
  throw InvalidInput(InputErrc::unknown_name,
                     "unknown preset '" + std::string(name) + "' (expected mlp, lstm, glove, elmo)");
}

/// Gaussian KDE over `runs`, evaluated at the centers of `bins` equal-width
/// bins on [lo, hi] and renormalized into a mass function.
///
/// Densities are accumulated in log space, so bins far from every run still
/// compare correctly and the total never underflows to zero.
inline DiscreteDistribution fit_kde(const ScoreSample& runs, const KdeSpec& spec) {
  spec.validate();
  const double h = spec.bandwidth.resolve(runs);
  const double width = (spec.support_hi - spec.support_lo) / static_cast<double>(spec.bins);

  std::vector<double> centers(spec.bins);
  std::vector<double> log_density(spec.bins);
  const auto values = runs.sorted();
  for (std::size_t k = 0; k < spec.bins; ++k) {
    const double c = spec.support_lo + (static_cast<double>(k) + 0.5) * width;
    centers[k] = c;
    double top = -std::numeric_limits<double>::infinity();
    for (double v : values) {
      const double z = (c - v) / h;
      top = std::max(top, -0.5 * z * z);
    }
    double acc = 0.0;
    for (double v : values) {
      const double z = (c - v) / h;
      acc += std::exp(-0.5 * z * z - top);
    }
    log_density[k] = top + std::log(acc);
  }

  for (std::size_t k = 1; k < centers.size(); ++k) {
    if (!(centers[k - 1] < centers[k])) {
      throw InvalidInput(InputErrc::out_of_range, "KDE support too narrow for the bin count");
    }
  }

  const double peak = *std::max_element(log_density.begin(), log_density.end());
  std::vector<double> weights(spec.bins);
  for (std::size_t k = 0; k < spec.bins; ++k) weights[k] = std::exp(log_density[k] - peak);
  return DiscreteDistribution::from_weights(std::move(centers), std::move(weights));
}

/// Exact theta_n for i.i.d. draws, via the tail sum
///   theta_n = v_1 + sum_{j>=2} (v_j - v_{j-1}) (1 - F(v_{j-1})^n).
inline double exact_expected_max(const DiscreteDistribution& dist, std::size_t n) {
  if (n < 1) throw InvalidInput(InputErrc::budget_below_one, "budget n must be at least 1");
  const auto support = dist.support();
  const auto cumulative = dist.cumulative();
  const double power = static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t j = 1; j < support.size(); ++j) {
    const double tail = 1.0 - std::pow(cumulative[j - 1], power);
    if (tail <= 0.0) break;
    acc += (support[j] - support[j - 1]) * tail;
  }
  return std::min(support.front() + acc, support.back());
}

/// Monte Carlo theta_n: mean over `iterations` of the max of n draws.
inline double mc_expected_max(const DiscreteDistribution& dist, std::size_t n,
                              std::size_t iterations, RngStream rng) {
  if (n < 1) throw InvalidInput(InputErrc::budget_below_one, "budget n must be at least 1");
  if (iterations < 1) throw InvalidInput(InputErrc::out_of_range, "iterations must be positive");
  const auto support = dist.support();
  double total = 0.0;
  for (std::size_t it = 0; it < iterations; ++it) {
    std::size_t best = 0;
    for (std::size_t k = 0; k < n; ++k) best = std::max(best, dist.quantile_index(rng.uniform()));
    total += support[best];
  }
  return total / static_cast<double>(iterations);
}

namespace detail {

inline void draw_into(const DiscreteDistribution& dist, RngStream& rng, std::span<double> out) {
  const auto support = dist.support();
  for (double& v : out) v = support[dist.quantile_index(rng.uniform())];
}

}  // namespace detail

/// `count` i.i.d. draws by inverse-CDF lookup, in draw order.
inline ScoreSample draw_sample(const DiscreteDistribution& dist, std::size_t count,
                               RngStream& rng) {
  if (count < 1) throw InvalidInput(InputErrc::empty_sample, "draw count must be positive");
  std::vector<double> values(count);
  detail::draw_into(dist, rng, values);
  return ScoreSample(std::move(values));
}

/// Shape for deterministic synthetic runs: a Gaussian body with an optional
/// Pareto upper tail spliced in above `tail_quantile` with matching slope.
struct SyntheticShape {
  double mean = 0.75;
  double sd = 0.02;
  double tail_quantile = 1.0;  // 1 disables the tail
  double tail_alpha = 2.0;

  void validate() const {
    if (!(sd > 0.0) || !std::isfinite(mean)) {
      throw InvalidInput(InputErrc::out_of_range, "synthetic runs need finite mean and sd > 0");
    }
    if (!(tail_quantile > 0.0 && tail_quantile <= 1.0)) {
      throw InvalidInput(InputErrc::out_of_range, "tail quantile must lie in (0, 1]");
    }
    if (!(tail_alpha > 0.0)) {
      throw InvalidInput(InputErrc::out_of_range, "tail alpha must be positive");
    }
  }

  double quantile(double q) const {
    const double q0 = tail_quantile;
    const double body = mean + sd * special::normal_quantile(std::min(q, q0));
    if (q <= q0) return body;
    const double scale = tail_alpha * (1.0 - q0) * sd / special::normal_pdf(special::normal_quantile(q0));
    return body + scale * (std::pow((1.0 - q0) / (1.0 - q), 1.0 / tail_alpha) - 1.0);
  }
};

/// Runs placed at the (i + 1/2) / count quantiles of `shape`, ascending.
/// Stand-ins for real tuning results; no randomness involved.
inline std::vector<double> synthetic_runs(const SyntheticShape& shape, std::size_t count) {
  shape.validate();
  if (count < 1) throw InvalidInput(InputErrc::empty_sample, "run count must be positive");
  std::vector<double> runs(count);
  for (std::size_t i = 0; i < count; ++i) {
    runs[i] = shape.quantile((static_cast<double>(i) + 0.5) / static_cast<double>(count));
  }
  return runs;
}

}  // namespace meanmax
