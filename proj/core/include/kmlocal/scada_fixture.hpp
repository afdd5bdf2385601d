#pragma once

#include <cstdint>
#include <limits>

#include "kmlocal/ingest.hpp"
#include "kmlocal/simulate.hpp"

namespace kmlocal {

/// Synthetic SCADA-like wind turbine records: an Ornstein-Uhlenbeck wind
/// speed drives power that relaxes linearly toward a logistic power curve,
/// optionally capped ("regulated down") from a given day on.
struct ScadaFixtureSpec {
  double days = 365.0;
  double start_epoch = 1483228800.0;  ///< 2017-01-01T00:00:00Z
  double record_interval = 5.0;       ///< seconds between raw records
  double timestamp_jitter = 1.0;      ///< uniform +/- seconds on each timestamp
  double drop_probability = 0.02;     ///< single record lost
  double outage_probability = 2e-5;   ///< outage starting at a record
  double outage_mean_duration = 600.0;
  double rated_power = 3000.0;  ///< kW
  double wind_mean = 9.0;
  double wind_sd = 3.5;
  double wind_correlation_time = 7200.0;
  double relaxation_rate = 0.05;  ///< 1/s
  double power_diffusion = 1.25;  ///< (% rated)^2 / s
  double curve_center = 9.5;      ///< m/s
  double curve_width = 1.1;       ///< m/s
  double regulation_day = std::numeric_limits<double>::quiet_NaN();  ///< NaN: stationary
  double regulated_cap = 70.0;  ///< % rated
  std::uint64_t seed = kDefaultSeed;

  /// Fixed point of the power dynamics in % of rated power at wind speed u
  /// and `elapsed` seconds since start.
  double power_curve(double u, double elapsed) const;
};

/// Raw records with channels "wind_speed" (m/s) and "power" (kW).
RawRecords generate_scada(const ScadaFixtureSpec& spec);

}  // namespace kmlocal
