#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "kmlocal/basis.hpp"
#include "kmlocal/grid.hpp"
#include "kmlocal/kernels.hpp"
#include "kmlocal/series.hpp"

namespace kmlocal {

/// Delta_m x_i = x_{i+m} - x_i for i < N - m. An increment is missing when
/// either endpoint is.
struct IncrementSeries {
  std::vector<double> values;
  std::vector<bool> missing;
  std::size_t lag = 1;
};

IncrementSeries increments(const SampledSeries& series, std::size_t lag);

/// Rejection thresholds shared by every estimator.
struct EstimatorOptions {
  /// A grid point needs an effective count of at least max(N_f, this).
  double min_effective_count = 10.0;
  /// Largest accepted condition number of the normalised Gram matrix.
  double max_condition = 1e8;
};

/// Why a grid point carries no estimate.
enum class Rejection { None, EmptySupport, LowCount, RankDeficient, IllConditioned };

std::string_view to_string(Rejection reason);

/// Conditional moment M^(n)(g, tau_m) at one grid point.
struct MomentEstimate {
  std::vector<double> grid_point;
  int order = 1;
  std::size_t lag_steps = 1;
  double value = 0.0;            ///< NaN when invalid
  double effective_count = 0.0;  ///< sum of raw kernel values (bin count for binning)
  bool valid = false;
  Rejection reason = Rejection::EmptySupport;
};

/// Coefficients phi(g, tau_m) of a (weighted) moment fit and their
/// tau -> 0 counterparts Phi(g).
struct LocalCoefficients {
  std::vector<double> grid_point;
  int order = 1;
  std::size_t lag_steps = 1;
  std::vector<double> phi;  ///< NaN entries when invalid
  std::vector<double> Phi;
  double gram_condition = 0.0;
  double effective_count = 0.0;
  bool valid = false;
  Rejection reason = Rejection::EmptySupport;
};

/// Nadaraya-Watson estimate sum_i (Delta x_i)^n w(c_i - g). Increments are
/// conditioned on c at their start index.
std::vector<MomentEstimate> conditional_moment_nw(const SampledSeries& series,
                                                  const ConditionSeries& conditions,
                                                  const Grid& grid, const KernelSpec& kernel,
                                                  int order, std::size_t lag,
                                                  const EstimatorOptions& options = {});

/// Binning estimate on a grid built from regular axes (see bin_grid). Every
/// increment is assigned to exactly one half-open cell.
std::vector<MomentEstimate> binning_estimate(const SampledSeries& series,
                                             const ConditionSeries& conditions,
                                             const Grid& grid, int order, std::size_t lag,
                                             const EstimatorOptions& options = {});

/// Global statistical moment fit (unweighted means over valid increments).
/// Throws SolveRejected when the mean Gram matrix is singular or ill-conditioned.
LocalCoefficients global_moment_fit(const SampledSeries& series, const FitBasis& basis,
                                    int order, std::size_t lag,
                                    const EstimatorOptions& options = {});

/// As above with a separate dependency series feeding the fit-functions.
LocalCoefficients global_moment_fit(const SampledSeries& series,
                                    const SampledSeries& dependency, const FitBasis& basis,
                                    int order, std::size_t lag,
                                    const EstimatorOptions& options = {});

/// Local statistical moment fit: per grid point,
/// phi = (sum w F(x_i))^-1 (sum w (Delta x_i)^n f(x_i)), w = normalised kernel weights.
/// The dependency variable defaults to the series itself.
std::vector<LocalCoefficients> local_moment_fit(const SampledSeries& series,
                                                const ConditionSeries& conditions,
                                                const Grid& grid, const KernelSpec& kernel,
                                                const FitBasis& basis, int order,
                                                std::size_t lag,
                                                const EstimatorOptions& options = {});

std::vector<LocalCoefficients> local_moment_fit(const SampledSeries& series,
                                                const SampledSeries& dependency,
                                                const ConditionSeries& conditions,
                                                const Grid& grid, const KernelSpec& kernel,
                                                const FitBasis& basis, int order,
                                                std::size_t lag,
                                                const EstimatorOptions& options = {});

/// Moment fit with caller-supplied raw weights, one per increment start
/// index (length N - lag). Unusable increments are ignored.
LocalCoefficients weighted_moment_fit(const SampledSeries& series,
                                      const SampledSeries& dependency,
                                      std::span<const double> raw_weights,
                                      const FitBasis& basis, int order, std::size_t lag,
                                      const EstimatorOptions& options = {});

double factorial(int n);

/// D^(n) from moments at lags m (tau_m = m dt). One lag: M / (n! tau).
/// Several lags: least-squares slope of M against tau through the origin, / n!.
double km_from_moments(std::span<const double> values, std::span<const std::size_t> lags,
                       int order, double dt);

/// Recompute Phi of per-lag local fits (same grid, same order) by the
/// multi-lag rule. A point is valid only if valid at every lag.
std::vector<LocalCoefficients> combine_lags(
    std::span<const std::vector<LocalCoefficients>> per_lag, std::span<const std::size_t> lags,
    double dt);

/// D^(n) per grid point from per-lag Nadaraya-Watson moments; NaN where any
/// lag is invalid.
std::vector<double> km_coefficients(std::span<const std::vector<MomentEstimate>> per_lag,
                                    std::span<const std::size_t> lags, double dt);

}  // namespace kmlocal
