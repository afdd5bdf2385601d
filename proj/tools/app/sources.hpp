#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "app/config.hpp"
#include "kmlocal/ingest.hpp"
#include "kmlocal/series.hpp"

namespace kmlocal::app {

/// Channels of a run on one uniform clock, "t" (seconds since start) included.
struct Dataset {
  std::vector<std::string> names;
  std::vector<SampledSeries> channels;
  double dt = 1.0;
  double start = 0.0;  ///< epoch seconds of sample 0 for ingested data
  std::optional<RawRecords> raw;  ///< unaggregated records of the synthetic SCADA source

  const SampledSeries& channel(std::string_view name) const;
};

Dataset load_source(const RunConfig& config);

/// Target, dependency and condition channels sharing one missing mask.
struct EstimationInput {
  SampledSeries target;
  SampledSeries dependency;
  ConditionSeries conditions;  ///< empty when the config has no conditions
};

EstimationInput estimation_input(const RunConfig& config, const Dataset& data);

}  // namespace kmlocal::app
