#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kmlocal {

/// Uniformly sampled scalar signal with a missing-value mask.
struct SampledSeries {
  std::vector<double> values;
  std::vector<bool> missing;
  double dt = 1.0;

  SampledSeries() = default;
  SampledSeries(std::vector<double> values, double dt);
  SampledSeries(std::vector<double> values, std::vector<bool> missing, double dt);

  std::size_t size() const noexcept { return values.size(); }
  bool is_missing(std::size_t i) const { return missing[i]; }
  std::size_t missing_count() const;
};

/// Evenly spaced model time t_i = i * dt, as a condition channel.
SampledSeries time_channel(std::size_t n, double dt);

/// D named condition channels aligned index-for-index with a series.
/// A sample is missing when it is missing in any channel.
class ConditionSeries {
 public:
  ConditionSeries() = default;
  ConditionSeries(std::vector<std::string> names, std::vector<SampledSeries> channels);

  std::size_t dimension() const noexcept { return channels_.size(); }
  std::size_t size() const noexcept { return channels_.empty() ? 0 : channels_.front().size(); }

  const std::vector<std::string>& names() const noexcept { return names_; }
  const SampledSeries& channel(std::size_t d) const { return channels_[d]; }
  double value(std::size_t d, std::size_t i) const { return channels_[d].values[i]; }
  bool is_missing(std::size_t i) const { return missing_[i]; }

  /// Index of the channel called `name`, or dimension() if absent.
  std::size_t find(std::string_view name) const;

 private:
  std::vector<std::string> names_;
  std::vector<SampledSeries> channels_;
  std::vector<bool> missing_;
};

}  // namespace kmlocal
