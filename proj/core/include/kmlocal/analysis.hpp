#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "kmlocal/basis.hpp"
#include "kmlocal/estimators.hpp"

namespace kmlocal {

/// Linear drift D1 = Phi0 + Phi1 x at one grid point.
struct DriftLine {
  std::vector<double> grid_point;
  double Phi0 = 0.0;
  double Phi1 = 0.0;
  std::optional<double> fixed_point;  ///< -Phi0 / Phi1, absent when Phi1 == 0
  bool stable = false;                ///< Phi1 < 0
  bool valid = false;
};

/// True when the basis evaluates as (1, x) in that order.
bool is_linear_basis(const FitBasis& basis);

/// Fixed point of an order-1 fit with the (1, x) basis. Invalid coefficients
/// propagate as valid = false; any other basis throws DomainError.
DriftLine fixed_point(const LocalCoefficients& coeffs, const FitBasis& basis);

/// D(x, g) = sum_j Phi_j f_j(x) evaluated at a grid point.
struct DriftSample {
  std::vector<double> grid_point;
  double x = 0.0;
  double value = 0.0;
  bool valid = true;
};

/// Evaluates every valid coefficient set at each x; invalid points emit no rows.
std::vector<DriftSample> drift_surface(std::span<const LocalCoefficients> coeffs,
                                       const FitBasis& basis, std::span<const double> xs);

/// Ground-truth drift as a function of the dependency value and grid point.
using DriftFunction = std::function<double(double x, std::span<const double> grid_point)>;

struct ErrorMetrics {
  double mean_abs_error = 0.0;
  double max_abs_error = 0.0;
  std::vector<double> residuals;  ///< estimate - truth, valid samples only
  std::size_t used = 0;
  std::size_t excluded = 0;
};

/// Throws DomainError when no valid sample remains.
ErrorMetrics error_metrics(std::span<const DriftSample> estimated, const DriftFunction& truth);

}  // namespace kmlocal
