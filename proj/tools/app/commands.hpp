#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "app/config.hpp"
#include "app/sources.hpp"
#include "kmlocal/analysis.hpp"
#include "kmlocal/estimators.hpp"
#include "kmlocal/grid.hpp"

namespace kmlocal::app {

std::string_view version();

Grid build_grid(const RunConfig& config, const ConditionSeries& conditions);

/// Per-grid-point results of every configured order, in order-major sequence.
/// Nadaraya-Watson rows carry M in phi_0 and D in Phi_0; a global fit is a
/// single row with an empty grid point.
struct EstimateOutput {
  std::vector<std::string> condition_names;
  std::vector<LocalCoefficients> rows;
  std::string lag_label;
};

EstimateOutput run_estimate(const RunConfig& config, const Dataset& data);

/// Throws ConfigError unless the run can produce fixed points.
void check_fixed_point_setup(const RunConfig& config);

/// Fixed points of the order-1 rows. Needs a (1, x) basis and method local or global.
std::vector<DriftLine> run_powercurve(const RunConfig& config, const EstimateOutput& estimate);

/// Known drift of a built-in process as a function of the dependency value
/// and the grid point laid out as `condition_names`.
DriftFunction builtin_truth(std::string_view name, const std::vector<std::string>& condition_names);

/// Order-1 drift evaluated per valid grid point: at the grid coordinate of
/// the dependency channel when it is a condition, otherwise over the metrics x range.
std::vector<DriftSample> drift_samples(const RunConfig& config, const EstimateOutput& estimate);

ErrorMetrics run_metrics(const RunConfig& config, const EstimateOutput& estimate);

/// Run record written next to every output: config, seed, version, warnings, files.
nlohmann::json manifest(const RunConfig& config, std::string_view command,
                        const std::vector<std::string>& outputs);

// Each command writes into config.out and reports progress on `log`.
// Hard failures throw; per-grid-point rejections only show up in the tables.
void cmd_simulate(const RunConfig& config, std::ostream& log);
void cmd_estimate(const RunConfig& config, std::ostream& log);
void cmd_powercurve(const RunConfig& config, std::ostream& log);
void cmd_metrics(const RunConfig& config, std::ostream& log);

}  // namespace kmlocal::app
