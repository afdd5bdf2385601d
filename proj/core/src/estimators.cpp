#include "kmlocal/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "kmlocal/error.hpp"

namespace kmlocal {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Smallest-to-largest eigenvalue ratio below which the Gram matrix counts as
// rank-deficient rather than merely ill-conditioned.
constexpr double kRankTolerance = 1e-13;

void check_order_and_lag(int order, std::size_t lag, std::size_t n) {
  if (order < 1) throw DomainError("moment order must be >= 1");
  if (lag < 1) throw DomainError("lag must be >= 1");
  if (lag >= n) {
    throw DomainError("lag " + std::to_string(lag) + " must be shorter than the series length " +
                      std::to_string(n));
  }
}

// Per increment start index i < N - m: (Delta x_i)^n, f(x_i) and usability.
struct Design {
  std::size_t count = 0;
  std::size_t nf = 1;
  std::vector<double> powered;
  std::vector<double> features;  // count x nf, row-major
  std::vector<unsigned char> usable;

  std::span<const double> row(std::size_t i) const { return {features.data() + i * nf, nf}; }
};

Design make_design(const SampledSeries& series, const SampledSeries& dependency,
                   const ConditionSeries* conditions, const FitBasis& basis, int order,
                   std::size_t lag) {
  const std::size_t n = series.size();
  check_order_and_lag(order, lag, n);
  if (dependency.size() != n) {
    throw ShapeError("dependency series length " + std::to_string(dependency.size()) +
                     " differs from series length " + std::to_string(n));
  }
  if (conditions && conditions->size() != n) {
    throw ShapeError("condition series length " + std::to_string(conditions->size()) +
                     " differs from series length " + std::to_string(n));
  }

  Design d;
  d.count = n - lag;
  d.nf = basis.size();
  d.powered.assign(d.count, 0.0);
  d.features.assign(d.count * d.nf, 0.0);
  d.usable.assign(d.count, 0);
  for (std::size_t i = 0; i < d.count; ++i) {
    if (series.missing[i] || series.missing[i + lag] || dependency.missing[i]) continue;
    if (conditions && conditions->is_missing(i)) continue;
    d.usable[i] = 1;
    d.powered[i] = ipow(series.values[i + lag] - series.values[i], order);
    basis.eval_into(dependency.values[i], {d.features.data() + i * d.nf, d.nf});
  }
  return d;
}

// Weighted sums: total = sum k, gram = sum k F(x_i), rhs = sum k (Delta x)^n f(x_i).
struct Sums {
  explicit Sums(std::size_t nf) : nf(nf), gram(nf * nf, 0.0), rhs(nf, 0.0) {}

  void add(const Design& d, std::size_t i, double k) {
    total += k;
    const auto f = d.row(i);
    const double kp = k * d.powered[i];
    for (std::size_t a = 0; a < nf; ++a) {
      rhs[a] += kp * f[a];
      for (std::size_t b = 0; b <= a; ++b) gram[a * nf + b] += k * (f[a] * f[b]);
    }
  }

  std::size_t nf;
  double total = 0.0;
  std::vector<double> gram;  // lower triangle filled
  std::vector<double> rhs;
};

struct Solution {
  std::vector<double> phi;
  double condition = kNaN;
  Rejection reason = Rejection::None;
};

// Solves (gram / total) phi = rhs / total.
Solution solve(const Sums& s, double min_count, double max_condition) {
  Solution out;
  const auto nf = static_cast<Eigen::Index>(s.nf);
  out.phi.assign(s.nf, kNaN);
  if (!(s.total > 0.0)) {
    out.reason = Rejection::EmptySupport;
    return out;
  }
  if (s.total < min_count) {
    out.reason = Rejection::LowCount;
    return out;
  }

  Eigen::MatrixXd g(nf, nf);
  Eigen::VectorXd r(nf);
  for (Eigen::Index a = 0; a < nf; ++a) {
    r(a) = s.rhs[a] / s.total;
    for (Eigen::Index b = 0; b <= a; ++b) {
      g(a, b) = g(b, a) = s.gram[a * nf + b] / s.total;
    }
  }

  if (nf == 1) {
    out.condition = 1.0;
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g, Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues().minCoeff();
    const double lmax = eig.eigenvalues().maxCoeff();
    out.condition = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
    // A vanishing moment vector is solved exactly by phi = 0, the minimum-norm
    // solution, whatever the rank of the Gram matrix.
    if (r.isZero(0.0)) {
      out.phi.assign(s.nf, 0.0);
      return out;
    }
    if (!(lmax > 0.0) || lmin <= kRankTolerance * lmax) {
      out.reason = Rejection::RankDeficient;
      return out;
    }
    if (out.condition > max_condition) {
      out.reason = Rejection::IllConditioned;
      return out;
    }
  }

  const Eigen::VectorXd phi = g.ldlt().solve(r);
  for (Eigen::Index a = 0; a < nf; ++a) out.phi[a] = phi(a);
  return out;
}

// Candidate samples that can carry a non-zero kernel value at a grid point,
// always visited in ascending index order so that sums do not depend on the
// lookup path.
class SupportIndex {
 public:
  SupportIndex(const ConditionSeries& conditions, const KernelSpec& kernel,
               const std::vector<unsigned char>& usable)
      : conditions_(conditions), kernel_(kernel), count_(usable.size()) {
    for (std::size_t d = 0; d < kernel.dimension(); ++d) {
      if (!has_compact_support(kernel.family(d))) continue;
      Axis axis;
      axis.dim = d;
      const auto& v = conditions.channel(d).values;
      axis.monotone = std::is_sorted(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(count_)) &&
                      std::all_of(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(count_),
                                  [](double x) { return std::isfinite(x); });
      if (!axis.monotone) {
        for (std::size_t i = 0; i < count_; ++i) {
          if (usable[i]) axis.order.push_back(i);
        }
        std::stable_sort(axis.order.begin(), axis.order.end(),
                         [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        axis.sorted.reserve(axis.order.size());
        for (std::size_t i : axis.order) axis.sorted.push_back(v[i]);
      }
      axes_.push_back(std::move(axis));
    }
  }

  // Calls f(i) for every candidate index i in ascending order.
  template <typename F>
  void for_each(std::span<const double> g, std::vector<std::size_t>& scratch, F&& f) const {
    const Axis* best = nullptr;
    std::size_t best_lo = 0, best_hi = count_;
    for (const auto& axis : axes_) {
      const double h = kernel_.bandwidth(axis.dim);
      const double slack = 1e-9 * (std::abs(g[axis.dim]) + h);
      const double lo = g[axis.dim] - h - slack;
      const double hi = g[axis.dim] + h + slack;
      std::size_t a, b;
      if (axis.monotone) {
        const auto& v = conditions_.channel(axis.dim).values;
        const auto first = v.begin();
        const auto last = v.begin() + static_cast<std::ptrdiff_t>(count_);
        a = static_cast<std::size_t>(std::lower_bound(first, last, lo) - first);
        b = static_cast<std::size_t>(std::upper_bound(first, last, hi) - first);
      } else {
        a = static_cast<std::size_t>(
            std::lower_bound(axis.sorted.begin(), axis.sorted.end(), lo) - axis.sorted.begin());
        b = static_cast<std::size_t>(
            std::upper_bound(axis.sorted.begin(), axis.sorted.end(), hi) - axis.sorted.begin());
      }
      if (!best || b - a < best_hi - best_lo) {
        best = &axis;
        best_lo = a;
        best_hi = b;
      }
    }
    if (!best || best->monotone) {
      for (std::size_t i = best_lo; i < best_hi; ++i) f(i);
      return;
    }
    scratch.assign(best->order.begin() + static_cast<std::ptrdiff_t>(best_lo),
                   best->order.begin() + static_cast<std::ptrdiff_t>(best_hi));
    std::sort(scratch.begin(), scratch.end());
    for (std::size_t i : scratch) f(i);
  }

  double raw_kernel(std::size_t i, std::span<const double> g) const {
    double k = 1.0;
    for (std::size_t d = 0; d < g.size() && k != 0.0; ++d) {
      k *= detail::kernel_value(kernel_.family(d), conditions_.value(d, i) - g[d],
                                kernel_.bandwidth(d));
    }
    return k;
  }

 private:
  struct Axis {
    std::size_t dim = 0;
    bool monotone = false;
    std::vector<std::size_t> order;  // usable indices sorted by condition value
    std::vector<double> sorted;
  };

  const ConditionSeries& conditions_;
  const KernelSpec& kernel_;
  std::size_t count_;
  std::vector<Axis> axes_;
};

void check_kernel_setup(const ConditionSeries& conditions, const Grid& grid,
                        const KernelSpec& kernel) {
  if (grid.empty()) throw DomainError("estimation grid is empty");
  if (grid.dimension() != kernel.dimension()) {
    throw ShapeError("grid dimension " + std::to_string(grid.dimension()) +
                     " differs from kernel dimension " + std::to_string(kernel.dimension()));
  }
  if (conditions.dimension() != kernel.dimension()) {
    throw ShapeError("condition series has " + std::to_string(conditions.dimension()) +
                     " channels, kernel expects " + std::to_string(kernel.dimension()));
  }
}

// Runs the weighted accumulation for every grid point.
template <typename Emit>
void for_each_grid_point(const Design& design, const ConditionSeries& conditions,
                         const Grid& grid, const KernelSpec& kernel, Emit&& emit) {
  SupportIndex index(conditions, kernel, design.usable);
  std::vector<std::size_t> scratch;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto g = grid.point(k);
    Sums sums(design.nf);
    index.for_each(g, scratch, [&](std::size_t i) {
      if (!design.usable[i]) return;
      const double w = index.raw_kernel(i, g);
      if (w != 0.0) sums.add(design, i, w);
    });
    emit(k, sums);
  }
}

double tau_factor(int order, std::size_t lag, double dt) {
  return static_cast<double>(lag) * dt * factorial(order);
}

LocalCoefficients to_coefficients(const Solution& sol, const Sums& sums, int order,
                                  std::size_t lag, double dt) {
  LocalCoefficients c;
  c.order = order;
  c.lag_steps = lag;
  c.phi = sol.phi;
  c.gram_condition = sol.condition;
  c.effective_count = sums.total;
  c.reason = sol.reason;
  c.valid = sol.reason == Rejection::None;
  const double scale = tau_factor(order, lag, dt);
  c.Phi.resize(c.phi.size());
  for (std::size_t j = 0; j < c.phi.size(); ++j) c.Phi[j] = c.phi[j] / scale;
  return c;
}

const FitBasis& constant_basis() {
  static const FitBasis basis = make_polynomial_basis(0);
  return basis;
}

}  // namespace

IncrementSeries increments(const SampledSeries& series, std::size_t lag) {
  if (lag < 1) throw DomainError("lag must be >= 1");
  if (lag >= series.size()) {
    throw DomainError("lag " + std::to_string(lag) + " must be shorter than the series length " +
                      std::to_string(series.size()));
  }
  IncrementSeries out;
  out.lag = lag;
  const std::size_t n = series.size() - lag;
  out.values.resize(n);
  out.missing.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.missing[i] = series.missing[i] || series.missing[i + lag];
    out.values[i] = out.missing[i] ? kNaN : series.values[i + lag] - series.values[i];
  }
  return out;
}

std::string_view to_string(Rejection reason) {
  switch (reason) {
    case Rejection::None:
      return "";
    case Rejection::EmptySupport:
      return "empty_support";
    case Rejection::LowCount:
      return "low_count";
    case Rejection::RankDeficient:
      return "rank_deficient";
    case Rejection::IllConditioned:
      return "ill_conditioned";
  }
  return "unknown";
}

std::vector<MomentEstimate> conditional_moment_nw(const SampledSeries& series,
                                                  const ConditionSeries& conditions,
                                                  const Grid& grid, const KernelSpec& kernel,
                                                  int order, std::size_t lag,
                                                  const EstimatorOptions& options) {
  check_kernel_setup(conditions, grid, kernel);
  const Design design = make_design(series, series, &conditions, constant_basis(), order, lag);
  const double min_count = std::max(1.0, options.min_effective_count);

  std::vector<MomentEstimate> out(grid.size());
  for_each_grid_point(design, conditions, grid, kernel, [&](std::size_t k, const Sums& sums) {
    auto& m = out[k];
    m.grid_point = grid.point_vector(k);
    m.order = order;
    m.lag_steps = lag;
    m.effective_count = sums.total;
    if (!(sums.total > 0.0)) {
      m.reason = Rejection::EmptySupport;
    } else if (sums.total < min_count) {
      m.reason = Rejection::LowCount;
    } else {
      m.reason = Rejection::None;
    }
    m.valid = m.reason == Rejection::None;
    m.value = m.valid ? sums.rhs[0] / sums.total : kNaN;
  });
  return out;
}

std::vector<MomentEstimate> binning_estimate(const SampledSeries& series,
                                             const ConditionSeries& conditions,
                                             const Grid& grid, int order, std::size_t lag,
                                             const EstimatorOptions& options) {
  if (grid.empty()) throw DomainError("estimation grid is empty");
  const auto& axes = grid.axes();
  if (axes.empty()) throw DomainError("binning needs a grid built from regular axes");
  if (axes.size() != conditions.dimension()) {
    throw ShapeError("grid dimension " + std::to_string(axes.size()) +
                     " differs from condition dimension " +
                     std::to_string(conditions.dimension()));
  }
  for (const auto& a : axes) {
    if (!(a.spacing > 0.0) || !std::isfinite(a.origin) || !std::isfinite(a.end)) {
      throw DomainError("binning needs uniformly spaced axes with known cell edges");
    }
  }
  const Design design = make_design(series, series, &conditions, constant_basis(), order, lag);
  const std::size_t dim = axes.size();

  // Interior cell edges per axis; a value equal to an edge belongs to the
  // right-hand cell, the last cell is closed at `end`.
  std::vector<std::vector<double>> edges(dim);
  std::vector<std::size_t> stride(dim, 1);
  for (std::size_t d = 0; d < dim; ++d) {
    for (std::size_t k = 1; k < axes[d].values.size(); ++k) {
      edges[d].push_back(axes[d].origin + static_cast<double>(k) * axes[d].spacing);
    }
  }
  for (std::size_t d = dim - 1; d-- > 0;) stride[d] = stride[d + 1] * axes[d + 1].values.size();

  std::vector<double> totals(grid.size(), 0.0), sums(grid.size(), 0.0);
  for (std::size_t i = 0; i < design.count; ++i) {
    if (!design.usable[i]) continue;
    std::size_t cell = 0;
    bool inside = true;
    for (std::size_t d = 0; d < dim && inside; ++d) {
      const double c = conditions.value(d, i);
      if (c < axes[d].origin || c > axes[d].end) {
        inside = false;
        break;
      }
      const auto k = static_cast<std::size_t>(
          std::upper_bound(edges[d].begin(), edges[d].end(), c) - edges[d].begin());
      cell += k * stride[d];
    }
    if (!inside) continue;
    totals[cell] += 1.0;
    sums[cell] += 1.0 * design.powered[i];
  }

  const double min_count = std::max(1.0, options.min_effective_count);
  std::vector<MomentEstimate> out(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    auto& m = out[k];
    m.grid_point = grid.point_vector(k);
    m.order = order;
    m.lag_steps = lag;
    m.effective_count = totals[k];
    m.reason = totals[k] == 0.0        ? Rejection::EmptySupport
               : totals[k] < min_count ? Rejection::LowCount
                                       : Rejection::None;
    m.valid = m.reason == Rejection::None;
    m.value = m.valid ? sums[k] / totals[k] : kNaN;
  }
  return out;
}

LocalCoefficients global_moment_fit(const SampledSeries& series, const FitBasis& basis,
                                    int order, std::size_t lag,
                                    const EstimatorOptions& options) {
  return global_moment_fit(series, series, basis, order, lag, options);
}

LocalCoefficients global_moment_fit(const SampledSeries& series,
                                    const SampledSeries& dependency, const FitBasis& basis,
                                    int order, std::size_t lag,
                                    const EstimatorOptions& options) {
  const Design design = make_design(series, dependency, nullptr, basis, order, lag);
  Sums sums(design.nf);
  for (std::size_t i = 0; i < design.count; ++i) {
    if (design.usable[i]) sums.add(design, i, 1.0);
  }
  if (sums.total < static_cast<double>(design.nf)) {
    throw DomainError("global fit needs at least " + std::to_string(design.nf) +
                      " valid increments, got " + std::to_string(sums.total));
  }
  const Solution sol = solve(sums, static_cast<double>(design.nf), options.max_condition);
  if (sol.reason != Rejection::None) {
    throw SolveRejected("global moment fit rejected (" + std::string(to_string(sol.reason)) +
                            "), Gram condition estimate " + std::to_string(sol.condition),
                        sol.condition);
  }
  return to_coefficients(sol, sums, order, lag, series.dt);
}

std::vector<LocalCoefficients> local_moment_fit(const SampledSeries& series,
                                                const ConditionSeries& conditions,
                                                const Grid& grid, const KernelSpec& kernel,
                                                const FitBasis& basis, int order,
                                                std::size_t lag,
                                                const EstimatorOptions& options) {
  return local_moment_fit(series, series, conditions, grid, kernel, basis, order, lag, options);
}

std::vector<LocalCoefficients> local_moment_fit(const SampledSeries& series,
                                                const SampledSeries& dependency,
                                                const ConditionSeries& conditions,
                                                const Grid& grid, const KernelSpec& kernel,
                                                const FitBasis& basis, int order,
                                                std::size_t lag,
                                                const EstimatorOptions& options) {
  check_kernel_setup(conditions, grid, kernel);
  const Design design = make_design(series, dependency, &conditions, basis, order, lag);
  const double min_count =
      std::max(static_cast<double>(design.nf), options.min_effective_count);

  std::vector<LocalCoefficients> out(grid.size());
  for_each_grid_point(design, conditions, grid, kernel, [&](std::size_t k, const Sums& sums) {
    out[k] = to_coefficients(solve(sums, min_count, options.max_condition), sums, order, lag,
                             series.dt);
    out[k].grid_point = grid.point_vector(k);
  });
  return out;
}

LocalCoefficients weighted_moment_fit(const SampledSeries& series,
                                      const SampledSeries& dependency,
                                      std::span<const double> raw_weights,
                                      const FitBasis& basis, int order, std::size_t lag,
                                      const EstimatorOptions& options) {
  const Design design = make_design(series, dependency, nullptr, basis, order, lag);
  if (raw_weights.size() != design.count) {
    throw ShapeError("expected " + std::to_string(design.count) + " weights, got " +
                     std::to_string(raw_weights.size()));
  }
  Sums sums(design.nf);
  for (std::size_t i = 0; i < design.count; ++i) {
    const double w = raw_weights[i];
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("weights must be finite and >= 0");
    if (design.usable[i] && w != 0.0) sums.add(design, i, w);
  }
  const double min_count =
      std::max(static_cast<double>(design.nf), options.min_effective_count);
  return to_coefficients(solve(sums, min_count, options.max_condition), sums, order, lag,
                         series.dt);
}

double factorial(int n) {
  if (n < 0) throw DomainError("factorial of a negative number");
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

double km_from_moments(std::span<const double> values, std::span<const std::size_t> lags,
                       int order, double dt) {
  if (lags.empty()) throw DomainError("lag set is empty");
  if (values.size() != lags.size()) throw ShapeError("one moment value per lag is required");
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  if (order < 1) throw DomainError("moment order must be >= 1");
  for (std::size_t m : lags) {
    if (m < 1) throw DomainError("lags must be >= 1");
  }
  const double nfact = factorial(order);
  if (lags.size() == 1) return values[0] / (nfact * static_cast<double>(lags[0]) * dt);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < lags.size(); ++k) {
    const double tau = static_cast<double>(lags[k]) * dt;
    num += tau * values[k];
    den += tau * tau;
  }
  return num / den / nfact;
}

std::vector<LocalCoefficients> combine_lags(
    std::span<const std::vector<LocalCoefficients>> per_lag, std::span<const std::size_t> lags,
    double dt) {
  if (per_lag.empty() || lags.empty()) throw DomainError("lag set is empty");
  if (per_lag.size() != lags.size()) throw ShapeError("one fit per lag is required");
  const std::size_t points = per_lag.front().size();
  for (const auto& fits : per_lag) {
    if (fits.size() != points) throw ShapeError("per-lag fits cover different grids");
  }
  std::vector<LocalCoefficients> out(per_lag.front());
  std::vector<double> values(lags.size());
  for (std::size_t p = 0; p < points; ++p) {
    auto& c = out[p];
    bool valid = true;
    for (const auto& fits : per_lag) {
      if (!fits[p].valid) {
        valid = false;
        if (c.valid) c.reason = fits[p].reason;
      }
    }
    c.valid = valid;
    for (std::size_t j = 0; j < c.Phi.size(); ++j) {
      if (!valid) {
        c.Phi[j] = kNaN;
        continue;
      }
      for (std::size_t k = 0; k < lags.size(); ++k) values[k] = per_lag[k][p].phi[j];
      c.Phi[j] = km_from_moments(values, lags, c.order, dt);
    }
    for (const auto& fits : per_lag) {
      c.effective_count = std::min(c.effective_count, fits[p].effective_count);
    }
  }
  return out;
}

std::vector<double> km_coefficients(std::span<const std::vector<MomentEstimate>> per_lag,
                                    std::span<const std::size_t> lags, double dt) {
  if (per_lag.empty() || lags.empty()) throw DomainError("lag set is empty");
  if (per_lag.size() != lags.size()) throw ShapeError("one estimate set per lag is required");
  const std::size_t points = per_lag.front().size();
  std::vector<double> out(points, kNaN);
  std::vector<double> values(lags.size());
  for (std::size_t p = 0; p < points; ++p) {
    bool valid = true;
    for (std::size_t k = 0; k < lags.size(); ++k) {
      if (per_lag[k].size() != points) throw ShapeError("per-lag estimates cover different grids");
      valid = valid && per_lag[k][p].valid;
      values[k] = per_lag[k][p].value;
    }
    if (valid) out[p] = km_from_moments(values, lags, per_lag.front()[p].order, dt);
  }
  return out;
}

}  // namespace kmlocal
