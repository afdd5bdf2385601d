#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "kmlocal/series.hpp"

namespace kmlocal {

/// One regularly spaced grid axis. Each value owns the cell
/// [origin + k*spacing, origin + (k+1)*spacing); the last cell is closed at `end`.
struct GridAxis {
  std::vector<double> values;
  double spacing = 0.0;
  double origin = std::numeric_limits<double>::quiet_NaN();
  double end = std::numeric_limits<double>::quiet_NaN();
};

/// `count` evenly spaced values from lo to hi inclusive.
GridAxis linspace_axis(double lo, double hi, std::size_t count);

/// `count` bin centres covering [lo, hi] with cells of width (hi - lo) / count.
GridAxis bin_axis(double lo, double hi, std::size_t count);

/// G condition vectors of dimension D.
class Grid {
 public:
  Grid() = default;

  /// Explicit points; all must share one dimension.
  static Grid from_points(const std::vector<std::vector<double>>& points);

  /// Cartesian product of the axes, last axis varying fastest.
  static Grid from_axes(std::vector<GridAxis> axes);

  std::size_t size() const noexcept { return dim_ ? coords_.size() / dim_ : 0; }
  std::size_t dimension() const noexcept { return dim_; }
  bool empty() const noexcept { return size() == 0; }

  std::span<const double> point(std::size_t k) const {
    return {coords_.data() + k * dim_, dim_};
  }
  std::vector<double> point_vector(std::size_t k) const;

  /// Construction metadata; empty for explicit grids.
  const std::vector<GridAxis>& axes() const noexcept { return axes_; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
  std::vector<GridAxis> axes_;
};

/// Per channel, `count` points between the given percentiles of the
/// non-missing condition values (linear interpolation between order statistics).
Grid percentile_grid(const ConditionSeries& conditions, std::size_t count = 50,
                     double lower_percentile = 1.0, double upper_percentile = 99.0);

/// Per channel, `bins` equal-width bins spanning [min, max] of the non-missing
/// condition values.
Grid bin_grid(const ConditionSeries& conditions, std::size_t bins);

/// Linear-interpolated percentile (0..100) of the values.
double percentile(std::vector<double> values, double pct);

}  // namespace kmlocal
