#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kmlocal/analysis.hpp"
#include "kmlocal/estimators.hpp"
#include "kmlocal/series.hpp"

namespace kmlocal {

/// Shortest round-trip decimal representation; empty for NaN.
std::string format_number(double value);

/// Aligned-series CSV: index, t, <names...>; missing values are empty cells.
void write_series_csv(std::ostream& out, std::span<const std::string> names,
                      std::span<const SampledSeries> channels, double t0 = 0.0);

/// One row per grid point:
/// order, lag, <condition names...>, phi_0.., Phi_0.., effective_count,
/// gram_condition, valid, reason.
void write_coefficients_csv(std::ostream& out, std::span<const std::string> condition_names,
                            std::span<const LocalCoefficients> rows, std::string_view lag_label);

/// Fixed-point heat map: <condition names...>, fixed_point, Phi1, stable, valid.
void write_heatmap_csv(std::ostream& out, std::span<const std::string> condition_names,
                       std::span<const DriftLine> lines);

/// Opens `path` for writing (creating parent directories) and calls `body`.
void write_file(const std::filesystem::path& path,
                const std::function<void(std::ostream&)>& body);

}  // namespace kmlocal
