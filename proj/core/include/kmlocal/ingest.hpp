#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "kmlocal/series.hpp"

namespace kmlocal {

/// Irregularly timed measurements. Absent channel values are NaN.
struct RawRecords {
  std::vector<double> timestamps;  ///< strictly increasing epoch seconds
  std::vector<std::string> names;
  std::vector<std::vector<double>> channels;

  std::size_t size() const noexcept { return timestamps.size(); }
  const std::vector<double>& channel(std::string_view name) const;
  std::vector<double>& channel(std::string_view name);
};

/// Epoch seconds from a number or an ISO-8601 UTC date-time
/// ("2017-01-01T00:00:05Z", "2017-01-01 00:00:05", fractional seconds allowed).
double parse_timestamp(std::string_view text);

/// Reads a headered CSV. Rows are sorted by time and duplicate timestamps
/// are merged by averaging. Empty, "NA" and "nan" cells are absent values.
RawRecords load_csv(const std::filesystem::path& path, std::string_view time_column,
                    const std::vector<std::string>& channel_columns);

RawRecords parse_csv(std::istream& in, std::string_view time_column,
                     const std::vector<std::string>& channel_columns);

/// value / rated * 100 in place.
void to_percent_of_rated(RawRecords& records, std::string_view channel, double rated);

/// Channels on one uniform clock: sample k covers
/// [start + k window, start + (k+1) window).
struct AlignedSeries {
  double start = 0.0;
  double window = 1.0;
  std::vector<std::string> names;
  std::vector<SampledSeries> channels;

  std::size_t size() const noexcept { return channels.empty() ? 0 : channels.front().size(); }
  const SampledSeries& channel(std::string_view name) const;
  bool has_channel(std::string_view name) const;

  /// Seconds since `start` of each sample, never missing.
  SampledSeries time_channel() const;
};

/// Window means of the raw values; a window without any value is missing.
/// The clock starts at the first timestamp floored to a whole window.
AlignedSeries aggregate(const RawRecords& records, double window);

/// The named channels with one missing mask: missing in any of them.
AlignedSeries aligned_view(const AlignedSeries& series, const std::vector<std::string>& names);

}  // namespace kmlocal
