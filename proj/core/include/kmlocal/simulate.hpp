#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kmlocal/series.hpp"

namespace kmlocal {

/// Variance of the white-noise draws Gamma_i: <Gamma(t) Gamma(t')> = 2 delta(t - t').
inline constexpr double kNoiseIntensity = 2.0;

inline constexpr std::uint64_t kDefaultSeed = 42;

/// f(state, t) -> out, one entry per state dimension.
using VectorField =
    std::function<void(std::span<const double> state, double t, std::span<double> out)>;

/// Drift D1 and diffusion D2 of a (possibly coupled) Langevin process,
/// plus the Euler-Maruyama run parameters.
struct ProcessSpec {
  std::string name;
  std::vector<std::string> channel_names;  ///< one per dimension, e.g. {"x", "y"}
  VectorField drift;
  VectorField diffusion;
  std::vector<double> x0;
  double dt = 0.1;
  std::size_t n = 100000;
  std::uint64_t seed = kDefaultSeed;

  std::size_t dimension() const noexcept { return x0.size(); }

  /// Throws DomainError when dt <= 0, n < 2, dimension not in {1, 2} or
  /// names/x0 disagree.
  void validate() const;
};

/// One SampledSeries per process dimension.
struct SimulatedPath {
  std::vector<std::string> names;
  std::vector<SampledSeries> channels;

  const SampledSeries& channel(std::string_view name) const;
};

/// x_{i+1} = x_i + dt D1(x_i, t_i) + sqrt(dt D2(x_i, t_i)) Gamma_i with
/// Gamma_i ~ N(0, 2), independent per dimension, t_i = i dt.
/// Deterministic for a given seed. Throws SimulationError on negative D2.
SimulatedPath euler_maruyama(const ProcessSpec& spec);

/// "ou", "piecewise", "coupled2d" or "nonstationary2d" with x0 = 0,
/// n = 1e5, dt = 0.1. Throws LookupError listing valid names.
ProcessSpec builtin_process(std::string_view name);

const std::vector<std::string>& builtin_process_names();

}  // namespace kmlocal
