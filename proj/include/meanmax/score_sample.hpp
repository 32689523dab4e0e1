#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace meanmax {

/// Validation scores from B tuning runs.
///
/// Keeps both the order the scores arrived in and an ascending copy. The
/// prefix estimator reads the former; everything else reads the latter.
class ScoreSample {
 public:
  explicit ScoreSample(std::vector<double> values) : ingestion_(std::move(values)) {
    if (ingestion_.empty()) {
      throw InvalidInput(InputErrc::empty_sample, "score sample must not be empty");
    }
    for (std::size_t i = 0; i < ingestion_.size(); ++i) {
      if (!std::isfinite(ingestion_[i])) {
        throw InvalidInput(InputErrc::non_finite_value,
                           "score sample value at position " + std::to_string(i) +
                               " is not finite");
      }
    }
    sorted_ = ingestion_;
    std::sort(sorted_.begin(), sorted_.end());
  }

  ScoreSample(std::initializer_list<double> values)
      : ScoreSample(std::vector<double>(values)) {}

  std::size_t size() const noexcept { return sorted_.size(); }

  std::span<const double> sorted() const noexcept { return sorted_; }
  std::span<const double> ingestion_order() const noexcept { return ingestion_; }

  double min() const noexcept { return sorted_.front(); }
  double max() const noexcept { return sorted_.back(); }

  double mean() const noexcept {
    double sum = 0.0;
    for (double v : sorted_) sum += v;
    return sum / static_cast<double>(sorted_.size());
  }

  /// Sample standard deviation (B - 1 denominator); 0 for a single value.
  double stddev() const noexcept {
    if (sorted_.size() < 2) return 0.0;
    const double mu = mean();
    double ss = 0.0;
    for (double v : sorted_) ss += (v - mu) * (v - mu);
    return std::sqrt(ss / static_cast<double>(sorted_.size() - 1));
  }

  bool operator==(const ScoreSample& other) const {
    return ingestion_ == other.ingestion_;
  }

 private:
  std::vector<double> ingestion_;
  std::vector<double> sorted_;
};

}  // namespace meanmax
