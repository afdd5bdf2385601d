#include "kmlocal/series.hpp"

#include <algorithm>
#include <cmath>

#include "kmlocal/error.hpp"

namespace kmlocal {

SampledSeries::SampledSeries(std::vector<double> v, double step)
    : values(std::move(v)), missing(values.size(), false), dt(step) {
  if (!(dt > 0.0)) throw DomainError("series dt must be positive");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw DomainError("series value at index " + std::to_string(i) + " is not finite");
    }
  }
}

SampledSeries::SampledSeries(std::vector<double> v, std::vector<bool> mask, double step)
    : values(std::move(v)), missing(std::move(mask)), dt(step) {
  if (!(dt > 0.0)) throw DomainError("series dt must be positive");
  if (missing.size() != values.size()) {
    throw ShapeError("missing mask length " + std::to_string(missing.size()) +
                     " differs from series length " + std::to_string(values.size()));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!missing[i] && !std::isfinite(values[i])) {
      throw DomainError("series value at index " + std::to_string(i) + " is not finite");
    }
  }
}

std::size_t SampledSeries::missing_count() const {
  return static_cast<std::size_t>(std::count(missing.begin(), missing.end(), true));
}

SampledSeries time_channel(std::size_t n, double dt) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i) * dt;
  return SampledSeries(std::move(t), dt);
}

ConditionSeries::ConditionSeries(std::vector<std::string> names,
                                 std::vector<SampledSeries> channels)
    : names_(std::move(names)), channels_(std::move(channels)) {
  if (channels_.empty()) throw ShapeError("condition series needs at least one channel");
  if (names_.size() != channels_.size()) {
    throw ShapeError("condition series has " + std::to_string(channels_.size()) +
                     " channels but " + std::to_string(names_.size()) + " names");
  }
  const std::size_t n = channels_.front().size();
  for (std::size_t d = 0; d < channels_.size(); ++d) {
    if (channels_[d].size() != n) {
      throw ShapeError("condition channel '" + names_[d] + "' has length " +
                       std::to_string(channels_[d].size()) + ", expected " +
                       std::to_string(n));
    }
  }
  missing_.assign(n, false);
  for (const auto& ch : channels_) {
    for (std::size_t i = 0; i < n; ++i) {
      if (ch.missing[i]) missing_[i] = true;
    }
  }
}

std::size_t ConditionSeries::find(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  return static_cast<std::size_t>(it - names_.begin());
}

}  // namespace kmlocal
