#include "kmlocal/kernels.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "kmlocal/error.hpp"

namespace kmlocal {

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Gaussian:
      return "gaussian";
    case KernelFamily::Epanechnikov:
      return "epanechnikov";
    case KernelFamily::Rectangular:
      return "rectangular";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "gaussian") return KernelFamily::Gaussian;
  if (lower == "epanechnikov") return KernelFamily::Epanechnikov;
  if (lower == "rectangular") return KernelFamily::Rectangular;
  throw LookupError("unknown kernel family '" + std::string(name) +
                    "' (valid: gaussian, epanechnikov, rectangular)");
}

double kernel_eval(KernelFamily family, double x, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw DomainError("kernel bandwidth must be positive and finite, got " + std::to_string(h));
  }
  if (!std::isfinite(x)) throw DomainError("kernel argument must be finite");
  return detail::kernel_value(family, x, h);
}

KernelSpec::KernelSpec(std::vector<KernelFamily> families, std::vector<double> bandwidths)
    : families_(std::move(families)), bandwidths_(std::move(bandwidths)) {
  if (families_.empty()) throw ShapeError("kernel spec needs at least one dimension");
  if (families_.size() != bandwidths_.size()) {
    throw ShapeError("kernel spec has " + std::to_string(families_.size()) + " families but " +
                     std::to_string(bandwidths_.size()) + " bandwidths");
  }
  for (std::size_t d = 0; d < bandwidths_.size(); ++d) {
    if (!(bandwidths_[d] > 0.0) || !std::isfinite(bandwidths_[d])) {
      throw DomainError("bandwidth of dimension " + std::to_string(d) + " must be positive");
    }
  }
}

KernelSpec KernelSpec::uniform(KernelFamily family, double bandwidth, std::size_t dimension) {
  return KernelSpec(std::vector<KernelFamily>(dimension, family),
                    std::vector<double>(dimension, bandwidth));
}

double product_kernel(const KernelSpec& spec, std::span<const double> dx) {
  if (dx.size() != spec.dimension()) {
    throw ShapeError("offset has dimension " + std::to_string(dx.size()) +
                     ", kernel expects " + std::to_string(spec.dimension()));
  }
  double k = 1.0;
  for (std::size_t d = 0; d < dx.size() && k != 0.0; ++d) {
    if (!std::isfinite(dx[d])) throw DomainError("kernel argument must be finite");
    k *= detail::kernel_value(spec.family(d), dx[d], spec.bandwidth(d));
  }
  return k;
}

std::optional<WeightVector> normalize_weights(std::vector<double> raw) {
  double total = 0.0;
  for (double w : raw) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("raw weights must be finite and >= 0");
    total += w;
  }
  if (!(total > 0.0)) return std::nullopt;
  for (double& w : raw) w /= total;
  return WeightVector{std::move(raw), total};
}

std::optional<WeightVector> normalized_weights(const KernelSpec& spec,
                                               const ConditionSeries& conditions,
                                               std::span<const double> g) {
  if (conditions.size() == 0) throw DomainError("condition series is empty");
  if (g.size() != spec.dimension() || conditions.dimension() != spec.dimension()) {
    throw ShapeError("grid point, conditions and kernel dimensions disagree");
  }
  const std::size_t n = conditions.size();
  std::vector<double> raw(n, 0.0);
  std::vector<double> dx(spec.dimension());
  for (std::size_t i = 0; i < n; ++i) {
    if (conditions.is_missing(i)) continue;
    for (std::size_t d = 0; d < dx.size(); ++d) dx[d] = conditions.value(d, i) - g[d];
    raw[i] = product_kernel(spec, dx);
  }
  return normalize_weights(std::move(raw));
}

}  // namespace kmlocal
