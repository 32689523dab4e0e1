#pragma once

namespace meanmax {

/// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  double width() const noexcept { return hi - lo; }

  bool operator==(const Interval&) const = default;
};

}  // namespace meanmax
