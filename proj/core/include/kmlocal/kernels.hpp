#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "kmlocal/series.hpp"

namespace kmlocal {

/// Unnormalised kernel shapes. Compact kernels are supported on |x| <= h,
/// boundary included.
enum class KernelFamily { Gaussian, Epanechnikov, Rectangular };

std::string_view to_string(KernelFamily family);

/// Accepts "gaussian", "epanechnikov", "rectangular" (case-insensitive).
KernelFamily parse_kernel_family(std::string_view name);

constexpr bool has_compact_support(KernelFamily family) {
  return family != KernelFamily::Gaussian;
}

/// k(x / h). Throws DomainError for non-positive h or non-finite x.
double kernel_eval(KernelFamily family, double x, double h);

namespace detail {

/// kernel_eval without argument checks; h > 0 is the caller's invariant.
inline double kernel_value(KernelFamily family, double x, double h) noexcept {
  const double u = x / h;
  switch (family) {
    case KernelFamily::Gaussian:
      return std::exp(-0.5 * u * u);
    case KernelFamily::Epanechnikov:
      return std::abs(x) <= h ? std::max(0.0, 1.0 - u * u) : 0.0;
    case KernelFamily::Rectangular:
      return std::abs(x) <= h ? 1.0 : 0.0;
  }
  return 0.0;
}

}  // namespace detail

/// Per-dimension kernel family and bandwidth.
class KernelSpec {
 public:
  KernelSpec(std::vector<KernelFamily> families, std::vector<double> bandwidths);

  /// Same family and bandwidth in every one of `dimension` dimensions.
  static KernelSpec uniform(KernelFamily family, double bandwidth, std::size_t dimension = 1);

  std::size_t dimension() const noexcept { return families_.size(); }
  KernelFamily family(std::size_t d) const { return families_[d]; }
  double bandwidth(std::size_t d) const { return bandwidths_[d]; }
  const std::vector<KernelFamily>& families() const noexcept { return families_; }
  const std::vector<double>& bandwidths() const noexcept { return bandwidths_; }

 private:
  std::vector<KernelFamily> families_;
  std::vector<double> bandwidths_;
};

/// Product over dimensions of kernel_eval(family_d, dx_d, h_d).
double product_kernel(const KernelSpec& spec, std::span<const double> dx);

/// Normalised sample weights at one grid point.
struct WeightVector {
  std::vector<double> weights;
  double total_raw = 0.0;  ///< sum of unnormalised kernel values
};

/// Normalise raw kernel values to unit sum. std::nullopt marks an empty
/// support (every raw value zero).
std::optional<WeightVector> normalize_weights(std::vector<double> raw);

/// Weights of every sample of `conditions` at grid point `g`. Missing samples
/// get zero weight before normalisation. std::nullopt marks an empty support.
std::optional<WeightVector> normalized_weights(const KernelSpec& spec,
                                               const ConditionSeries& conditions,
                                               std::span<const double> g);

}  // namespace kmlocal
