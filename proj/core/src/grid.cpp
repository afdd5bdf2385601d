#include "kmlocal/grid.hpp"

#include <algorithm>
#include <cmath>

#include "kmlocal/error.hpp"

namespace kmlocal {

GridAxis linspace_axis(double lo, double hi, std::size_t count) {
  if (count == 0) throw DomainError("grid axis needs at least one point");
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw DomainError("grid axis bounds must be finite");
  GridAxis axis;
  if (count == 1) {
    axis.values = {lo};
    return axis;
  }
  if (!(hi > lo)) throw DomainError("grid axis needs hi > lo for more than one point");
  axis.spacing = (hi - lo) / static_cast<double>(count - 1);
  axis.values.resize(count);
  for (std::size_t k = 0; k < count; ++k) axis.values[k] = lo + static_cast<double>(k) * axis.spacing;
  axis.values.back() = hi;
  axis.origin = lo - 0.5 * axis.spacing;
  axis.end = hi + 0.5 * axis.spacing;
  return axis;
}

GridAxis bin_axis(double lo, double hi, std::size_t count) {
  if (count == 0) throw DomainError("bin axis needs at least one bin");
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
    throw DomainError("bin axis needs finite hi > lo");
  }
  GridAxis axis;
  axis.spacing = (hi - lo) / static_cast<double>(count);
  axis.origin = lo;
  axis.end = hi;
  axis.values.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    axis.values[k] = lo + (static_cast<double>(k) + 0.5) * axis.spacing;
  }
  return axis;
}

Grid Grid::from_points(const std::vector<std::vector<double>>& points) {
  Grid g;
  if (points.empty()) return g;
  g.dim_ = points.front().size();
  if (g.dim_ == 0) throw ShapeError("grid points must have dimension >= 1");
  g.coords_.reserve(points.size() * g.dim_);
  for (const auto& p : points) {
    if (p.size() != g.dim_) throw ShapeError("grid points have inconsistent dimensions");
    g.coords_.insert(g.coords_.end(), p.begin(), p.end());
  }
  return g;
}

Grid Grid::from_axes(std::vector<GridAxis> axes) {
  Grid g;
  if (axes.empty()) throw ShapeError("grid needs at least one axis");
  g.dim_ = axes.size();
  std::size_t total = 1;
  for (const auto& a : axes) {
    if (a.values.empty()) throw DomainError("grid axis has no values");
    total *= a.values.size();
  }
  g.coords_.resize(total * g.dim_);
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t rem = k;
    for (std::size_t d = g.dim_; d-- > 0;) {
      const std::size_t len = axes[d].values.size();
      g.coords_[k * g.dim_ + d] = axes[d].values[rem % len];
      rem /= len;
    }
  }
  g.axes_ = std::move(axes);
  return g;
}

std::vector<double> Grid::point_vector(std::size_t k) const {
  auto p = point(k);
  return {p.begin(), p.end()};
}

double percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw DomainError("percentile of an empty set");
  if (!(pct >= 0.0 && pct <= 100.0)) throw DomainError("percentile must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos = pct / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

std::vector<double> present_values(const ConditionSeries& conditions, std::size_t d) {
  std::vector<double> v;
  v.reserve(conditions.size());
  for (std::size_t i = 0; i < conditions.size(); ++i) {
    if (!conditions.is_missing(i)) v.push_back(conditions.value(d, i));
  }
  if (v.empty()) {
    throw DomainError("condition channel '" + conditions.names()[d] + "' has no present values");
  }
  return v;
}

}  // namespace

Grid percentile_grid(const ConditionSeries& conditions, std::size_t count,
                     double lower_percentile, double upper_percentile) {
  if (!(lower_percentile < upper_percentile)) {
    throw DomainError("lower percentile must be below the upper percentile");
  }
  std::vector<GridAxis> axes;
  for (std::size_t d = 0; d < conditions.dimension(); ++d) {
    auto v = present_values(conditions, d);
    const double lo = percentile(v, lower_percentile);
    const double hi = percentile(std::move(v), upper_percentile);
    if (count > 1 && !(hi > lo)) {
      throw DomainError("condition channel '" + conditions.names()[d] +
                        "' has no spread between the requested percentiles");
    }
    axes.push_back(linspace_axis(lo, hi, count));
  }
  return Grid::from_axes(std::move(axes));
}

Grid bin_grid(const ConditionSeries& conditions, std::size_t bins) {
  std::vector<GridAxis> axes;
  for (std::size_t d = 0; d < conditions.dimension(); ++d) {
    const auto v = present_values(conditions, d);
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    axes.push_back(bin_axis(*lo, *hi, bins));
  }
  return Grid::from_axes(std::move(axes));
}

}  // namespace kmlocal
