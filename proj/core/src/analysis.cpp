#include "kmlocal/analysis.hpp"

#include <cmath>

#include "kmlocal/error.hpp"

namespace kmlocal {

bool is_linear_basis(const FitBasis& basis) {
  if (basis.size() != 2) return false;
  for (double x : {-1.5, 0.0, 1.0, 2.0}) {
    const auto f = eval_basis(basis, x);
    if (f[0] != 1.0 || f[1] != x) return false;
  }
  return true;
}

DriftLine fixed_point(const LocalCoefficients& coeffs, const FitBasis& basis) {
  if (!is_linear_basis(basis)) throw DomainError("fixed points need the (1, x) fit basis");
  if (coeffs.order != 1) throw DomainError("fixed points need first-order (drift) coefficients");
  if (coeffs.Phi.size() != 2) throw ShapeError("drift line needs exactly two coefficients");

  DriftLine line;
  line.grid_point = coeffs.grid_point;
  if (!coeffs.valid) return line;
  line.valid = true;
  line.Phi0 = coeffs.Phi[0];
  line.Phi1 = coeffs.Phi[1];
  if (line.Phi1 != 0.0) line.fixed_point = -line.Phi0 / line.Phi1;
  line.stable = line.Phi1 < 0.0;
  return line;
}

std::vector<DriftSample> drift_surface(std::span<const LocalCoefficients> coeffs,
                                       const FitBasis& basis, std::span<const double> xs) {
  std::vector<DriftSample> out;
  std::vector<double> f(basis.size());
  for (const auto& c : coeffs) {
    if (!c.valid) continue;
    if (c.Phi.size() != basis.size()) {
      throw ShapeError("coefficient count " + std::to_string(c.Phi.size()) +
                       " differs from basis size " + std::to_string(basis.size()));
    }
    for (double x : xs) {
      basis.eval_into(x, f);
      double d = 0.0;
      for (std::size_t j = 0; j < f.size(); ++j) d += c.Phi[j] * f[j];
      out.push_back({c.grid_point, x, d, true});
    }
  }
  return out;
}

ErrorMetrics error_metrics(std::span<const DriftSample> estimated, const DriftFunction& truth) {
  ErrorMetrics m;
  double sum = 0.0;
  for (const auto& s : estimated) {
    if (!s.valid || !std::isfinite(s.value)) {
      ++m.excluded;
      continue;
    }
    const double r = s.value - truth(s.x, s.grid_point);
    m.residuals.push_back(r);
    sum += std::abs(r);
    m.max_abs_error = std::max(m.max_abs_error, std::abs(r));
  }
  m.used = m.residuals.size();
  if (m.used == 0) throw DomainError("no valid estimate overlaps the truth");
  m.mean_abs_error = sum / static_cast<double>(m.used);
  return m;
}

}  // namespace kmlocal
