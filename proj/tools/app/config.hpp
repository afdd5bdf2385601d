#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "kmlocal/estimators.hpp"
#include "kmlocal/kernels.hpp"
#include "kmlocal/simulate.hpp"

namespace kmlocal::app {

/// Invalid run configuration. The message starts with the offending field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path.empty() ? what : path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Polynomial coefficients in x, lowest order first, for a 1-D process.
struct CustomProcess {
  std::vector<double> drift;
  std::vector<double> diffusion;
  bool operator==(const CustomProcess&) const = default;
};

struct SimulateSource {
  std::string process;  ///< built-in name; empty when `custom` is set
  std::optional<CustomProcess> custom;
  std::size_t n = 100000;
  double dt = 0.1;
  std::optional<std::vector<double>> x0;
  bool operator==(const SimulateSource&) const = default;
};

struct RatedPower {
  std::string channel;
  double rated = 0.0;
  bool operator==(const RatedPower&) const = default;
};

struct CsvSource {
  std::string path;
  std::string time_column = "timestamp";
  std::vector<std::string> channels;
  double window = 10.0;
  std::optional<RatedPower> rated_power;
  bool operator==(const CsvSource&) const = default;
};

/// Synthetic wind turbine records, aggregated and normalised like a CSV source.
struct ScadaDemoSource {
  double days = 365.0;
  std::optional<double> regulation_day;
  double window = 10.0;
  double rated_power = 3000.0;
  bool operator==(const ScadaDemoSource&) const = default;
};

using Source = std::variant<SimulateSource, CsvSource, ScadaDemoSource>;

struct ConditionConfig {
  std::string channel;
  KernelFamily kernel = KernelFamily::Gaussian;
  double bandwidth = 0.0;
  bool operator==(const ConditionConfig&) const = default;
};

struct GridConfig {
  enum class Mode { Auto, Points, Axes };
  Mode mode = Mode::Auto;
  std::size_t count = 50;
  double lower = 1.0;
  double upper = 99.0;
  std::vector<std::vector<double>> points;  ///< Points: one vector per grid point
  std::vector<std::vector<double>> axes;    ///< Axes: one value list per condition
  bool operator==(const GridConfig&) const = default;
};

enum class Method { Np, Global, Local };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

struct MetricsConfig {
  std::string truth;
  double x_min = -2.0;
  double x_max = 2.0;
  std::size_t x_count = 41;
  bool operator==(const MetricsConfig&) const = default;
};

struct RunConfig {
  Source source = SimulateSource{};
  std::string target;
  std::string dependency;  ///< empty: the target itself
  std::vector<ConditionConfig> conditions;
  int basis_degree = 1;
  GridConfig grid;
  std::vector<int> orders{1, 2};
  std::vector<std::size_t> lags{1};
  Method method = Method::Local;
  double min_effective_count = 10.0;
  double max_condition = 1e8;
  std::uint64_t seed = kDefaultSeed;
  std::string out = "out";
  MetricsConfig metrics;

  bool operator==(const RunConfig&) const = default;

  const std::string& dependency_channel() const { return dependency.empty() ? target : dependency; }
  EstimatorOptions estimator_options() const { return {min_effective_count, max_condition}; }
  std::vector<std::string> condition_names() const;
  KernelSpec kernel() const;
};

/// Channels a source provides, "t" (seconds since start) included.
std::vector<std::string> source_channels(const Source& source);

/// Structural checks plus channel existence. Throws ConfigError.
void validate(const RunConfig& config);

/// Non-fatal remarks, e.g. a dependency channel that is also a condition.
std::vector<std::string> config_warnings(const RunConfig& config);

RunConfig parse_config(const nlohmann::json& doc);
nlohmann::json to_json(const RunConfig& config);

const std::vector<std::string>& preset_names();
RunConfig preset(std::string_view name);

/// Applies `patch` on top of `base` as a JSON merge patch, except that a
/// "source" or "grid" object in the patch replaces the base one outright.
RunConfig merge_config(const RunConfig& base, const nlohmann::json& patch);

/// The effective configuration of a run: the named preset, a JSON config
/// file, or the file merged onto the preset. A file may name its own base
/// through a top-level "preset" field when no preset is passed here.
RunConfig resolve_config(const std::optional<std::string>& preset_name,
                         const std::optional<std::string>& config_path);

}  // namespace kmlocal::app
