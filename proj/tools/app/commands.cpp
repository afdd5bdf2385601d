#include "app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <ostream>

#include <nlohmann/json.hpp>

#include "kmlocal/basis.hpp"
#include "kmlocal/error.hpp"
#include "kmlocal/io.hpp"

#ifndef KMLOCAL_VERSION
#define KMLOCAL_VERSION "0.0.0"
#endif

namespace kmlocal::app {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string lag_label(const std::vector<std::size_t>& lags) {
  std::string out;
  for (auto m : lags) out += (out.empty() ? "" : ";") + std::to_string(m);
  return out;
}

LocalCoefficients global_row(const EstimationInput& in, const FitBasis& basis, int order,
                             std::size_t lag, const EstimatorOptions& options) {
  try {
    return global_moment_fit(in.target, in.dependency, basis, order, lag, options);
  } catch (const SolveRejected&) {
    // Same solve with unit weights, kept as an invalid row with its diagnostics.
    const std::vector<double> ones(in.target.size() - lag, 1.0);
    return weighted_moment_fit(in.target, in.dependency, ones, basis, order, lag, options);
  }
}

std::vector<LocalCoefficients> nw_rows(const RunConfig& c, const EstimationInput& in,
                                       const Grid& grid, int order) {
  const auto kernel = c.kernel();
  std::vector<std::vector<MomentEstimate>> per_lag;
  for (auto m : c.lags) {
    per_lag.push_back(conditional_moment_nw(in.target, in.conditions, grid, kernel, order, m,
                                            c.estimator_options()));
  }
  const auto D = km_coefficients(per_lag, c.lags, in.target.dt);
  std::vector<LocalCoefficients> rows;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto& first = per_lag.front()[k];
    LocalCoefficients r;
    r.grid_point = first.grid_point;
    r.order = order;
    r.lag_steps = first.lag_steps;
    r.effective_count = first.effective_count;
    r.gram_condition = kNaN;
    r.valid = !std::isnan(D[k]);
    r.reason = first.reason;
    for (const auto& lag : per_lag) {
      if (!lag[k].valid && r.reason == Rejection::None) r.reason = lag[k].reason;
    }
    r.phi = {r.valid ? first.value : kNaN};
    r.Phi = {D[k]};
    rows.push_back(std::move(r));
  }
  return rows;
}

json coefficients_json(const LocalCoefficients& r) {
  return {{"order", r.order},
          {"lag_steps", r.lag_steps},
          {"grid_point", r.grid_point},
          {"phi", r.phi},
          {"Phi", r.Phi},
          {"effective_count", r.effective_count},
          {"gram_condition", r.gram_condition},
          {"valid", r.valid},
          {"reason", std::string(to_string(r.reason))}};
}

void log_warnings(const RunConfig& config, std::ostream& log) {
  for (const auto& w : config_warnings(config)) log << "warning: " << w << '\n';
}

void write_manifest(const RunConfig& config, std::string_view command,
                    const std::vector<std::string>& outputs, std::ostream& log) {
  const auto path = fs::path(config.out) / (std::string(command) + ".manifest.json");
  write_file(path, [&](std::ostream& o) { o << manifest(config, command, outputs).dump(2) << '\n'; });
  for (const auto& f : outputs) log << "wrote " << (fs::path(config.out) / f).string() << '\n';
  log << "wrote " << path.string() << '\n';
}

FitBasis basis_for(const RunConfig& c) {
  return make_polynomial_basis(c.method == Method::Np ? 0 : c.basis_degree);
}

}  // namespace

std::string_view version() { return KMLOCAL_VERSION; }

Grid build_grid(const RunConfig& c, const ConditionSeries& conditions) {
  switch (c.grid.mode) {
    case GridConfig::Mode::Auto:
      return percentile_grid(conditions, c.grid.count, c.grid.lower, c.grid.upper);
    case GridConfig::Mode::Points:
      return Grid::from_points(c.grid.points);
    case GridConfig::Mode::Axes: {
      std::vector<GridAxis> axes;
      for (const auto& values : c.grid.axes) {
        GridAxis a;
        a.values = values;
        axes.push_back(std::move(a));
      }
      return Grid::from_axes(std::move(axes));
    }
  }
  return {};
}

EstimateOutput run_estimate(const RunConfig& c, const Dataset& data) {
  const auto in = estimation_input(c, data);
  EstimateOutput out;
  out.lag_label = lag_label(c.lags);
  out.condition_names = c.condition_names();
  const auto options = c.estimator_options();
  const auto basis = basis_for(c);
  const double dt = in.target.dt;

  if (c.method == Method::Global) {
    for (int n : c.orders) {
      std::vector<std::vector<LocalCoefficients>> per_lag;
      for (auto m : c.lags) per_lag.push_back({global_row(in, basis, n, m, options)});
      auto rows = c.lags.size() == 1 ? per_lag.front() : combine_lags(per_lag, c.lags, dt);
      out.rows.insert(out.rows.end(), rows.begin(), rows.end());
    }
    return out;
  }

  const auto grid = build_grid(c, in.conditions);
  if (grid.dimension() != c.conditions.size()) {
    throw ConfigError("grid", "grid dimension differs from the number of conditions");
  }
  for (int n : c.orders) {
    std::vector<LocalCoefficients> rows;
    if (c.method == Method::Np) {
      rows = nw_rows(c, in, grid, n);
    } else {
      std::vector<std::vector<LocalCoefficients>> per_lag;
      for (auto m : c.lags) {
        per_lag.push_back(local_moment_fit(in.target, in.dependency, in.conditions, grid,
                                           c.kernel(), basis, n, m, options));
      }
      rows = c.lags.size() == 1 ? std::move(per_lag.front()) : combine_lags(per_lag, c.lags, dt);
    }
    out.rows.insert(out.rows.end(), std::make_move_iterator(rows.begin()),
                    std::make_move_iterator(rows.end()));
  }
  return out;
}

void check_fixed_point_setup(const RunConfig& c) {
  if (c.method == Method::Np) {
    throw ConfigError("method", "fixed points need a fitted basis (method local or global)");
  }
  if (c.basis_degree != 1) throw ConfigError("basis", "fixed points need polynomial(1)");
  if (std::find(c.orders.begin(), c.orders.end(), 1) == c.orders.end()) {
    throw ConfigError("orders", "fixed points need order 1");
  }
}

std::vector<DriftLine> run_powercurve(const RunConfig& c, const EstimateOutput& estimate) {
  check_fixed_point_setup(c);
  const auto basis = make_polynomial_basis(1);
  std::vector<DriftLine> lines;
  for (const auto& r : estimate.rows) {
    if (r.order == 1) lines.push_back(fixed_point(r, basis));
  }
  return lines;
}

DriftFunction builtin_truth(std::string_view name, const std::vector<std::string>& names) {
  const auto index_of = [&](std::string_view channel) -> std::size_t {
    const auto it = std::find(names.begin(), names.end(), channel);
    if (it == names.end()) {
      throw ConfigError("metrics.truth", "truth '" + std::string(name) +
                                             "' needs condition channel '" +
                                             std::string(channel) + "'");
    }
    return static_cast<std::size_t>(it - names.begin());
  };
  if (name == "ou") return [](double x, std::span<const double>) { return -x; };
  if (name == "piecewise") {
    return [](double x, std::span<const double>) { return x <= 0.0 ? -0.5 * x : -2.0 * x; };
  }
  if (name == "coupled2d") {
    const auto y = index_of("y");
    return [y](double x, std::span<const double> g) { return -std::abs(g[y]) * x; };
  }
  if (name == "nonstationary2d") {
    const auto y = index_of("y");
    const auto t = index_of("t");
    return [y, t](double x, std::span<const double> g) {
      const double shift = g[t] <= 5000.0 ? 0.0 : 2.0;
      return -std::abs(g[y]) * (x - shift);
    };
  }
  throw ConfigError("metrics.truth", "unknown truth '" + std::string(name) + "'");
}

std::vector<DriftSample> drift_samples(const RunConfig& c, const EstimateOutput& estimate) {
  const auto basis = basis_for(c);
  std::vector<LocalCoefficients> drift;
  for (const auto& r : estimate.rows) {
    if (r.order == 1) drift.push_back(r);
  }
  if (drift.empty()) throw ConfigError("orders", "drift metrics need order 1");

  const auto& names = estimate.condition_names;
  const auto dep = std::find(names.begin(), names.end(), c.dependency_channel());
  if (c.method != Method::Global && dep != names.end()) {
    const auto d = static_cast<std::size_t>(dep - names.begin());
    std::vector<DriftSample> out;
    for (const auto& r : drift) {
      if (!r.valid) continue;
      const double x = r.grid_point[d];
      if (x < c.metrics.x_min || x > c.metrics.x_max) continue;
      const double xs[] = {x};
      const auto s = drift_surface(std::span(&r, 1), basis, xs);
      out.insert(out.end(), s.begin(), s.end());
    }
    return out;
  }
  const auto axis = linspace_axis(c.metrics.x_min, c.metrics.x_max, c.metrics.x_count);
  return drift_surface(drift, basis, axis.values);
}

ErrorMetrics run_metrics(const RunConfig& c, const EstimateOutput& estimate) {
  if (c.metrics.truth.empty()) throw ConfigError("metrics.truth", "missing required field");
  const auto truth = builtin_truth(c.metrics.truth, estimate.condition_names);
  const auto samples = drift_samples(c, estimate);
  return error_metrics(samples, truth);
}

json manifest(const RunConfig& c, std::string_view command, const std::vector<std::string>& outputs) {
  return {{"tool", "kmlocal"},
          {"version", std::string(version())},
          {"command", std::string(command)},
          {"seed", c.seed},
          {"config", to_json(c)},
          {"warnings", config_warnings(c)},
          {"outputs", outputs}};
}

void cmd_simulate(const RunConfig& c, std::ostream& log) {
  const auto data = load_source(c);
  std::vector<std::string> names;
  std::vector<SampledSeries> channels;
  for (std::size_t k = 0; k < data.names.size(); ++k) {
    if (data.names[k] == "t") continue;
    names.push_back(data.names[k]);
    channels.push_back(data.channels[k]);
  }
  std::vector<std::string> outputs{"series.csv"};
  write_file(fs::path(c.out) / "series.csv",
             [&](std::ostream& o) { write_series_csv(o, names, channels, data.start); });
  if (data.raw) {
    outputs.emplace_back("raw.csv");
    write_file(fs::path(c.out) / "raw.csv", [&](std::ostream& o) {
      const auto& raw = *data.raw;
      o << "timestamp";
      for (const auto& n : raw.names) o << ',' << n;
      o << '\n';
      for (std::size_t i = 0; i < raw.size(); ++i) {
        o << format_number(raw.timestamps[i]);
        for (const auto& ch : raw.channels) o << ',' << format_number(ch[i]);
        o << '\n';
      }
    });
  }
  write_manifest(c, "simulate", outputs, log);
}

void cmd_estimate(const RunConfig& c, std::ostream& log) {
  log_warnings(c, log);
  const auto data = load_source(c);
  const auto est = run_estimate(c, data);

  std::size_t valid = 0;
  json results = json::array();
  for (const auto& r : est.rows) {
    valid += r.valid ? 1 : 0;
    results.push_back(coefficients_json(r));
  }
  write_file(fs::path(c.out) / "coefficients.csv", [&](std::ostream& o) {
    write_coefficients_csv(o, est.condition_names, est.rows, est.lag_label);
  });
  write_file(fs::path(c.out) / "estimate.json", [&](std::ostream& o) {
    const json doc = {{"config", to_json(c)},
                      {"method", std::string(to_string(c.method))},
                      {"rows", est.rows.size()},
                      {"valid_rows", valid},
                      {"results", results}};
    o << doc.dump(2) << '\n';
  });
  log << valid << " of " << est.rows.size() << " rows valid\n";
  write_manifest(c, "estimate", {"coefficients.csv", "estimate.json"}, log);
}

void cmd_powercurve(const RunConfig& config, std::ostream& log) {
  RunConfig c = config;
  c.orders = {1};
  check_fixed_point_setup(c);
  log_warnings(c, log);
  const auto data = load_source(c);
  const auto lines = run_powercurve(c, run_estimate(c, data));
  const auto stable = std::count_if(lines.begin(), lines.end(),
                                    [](const DriftLine& l) { return l.valid && l.stable; });
  write_file(fs::path(c.out) / "heatmap.csv", [&](std::ostream& o) {
    write_heatmap_csv(o, c.condition_names(), lines);
  });
  log << stable << " of " << lines.size() << " grid points with a stable fixed point\n";
  write_manifest(c, "powercurve", {"heatmap.csv"}, log);
}

void cmd_metrics(const RunConfig& config, std::ostream& log) {
  RunConfig c = config;
  c.orders = {1};
  log_warnings(c, log);
  const auto data = load_source(c);
  const auto est = run_estimate(c, data);
  const auto m = run_metrics(c, est);
  write_file(fs::path(c.out) / "metrics.json", [&](std::ostream& o) {
    const json doc = {{"method", std::string(to_string(c.method))},
                      {"truth", c.metrics.truth},
                      {"mean_abs_error", m.mean_abs_error},
                      {"max_abs_error", m.max_abs_error},
                      {"used", m.used},
                      {"excluded", m.excluded}};
    o << doc.dump(2) << '\n';
  });
  log << "mean_abs_error " << format_number(m.mean_abs_error) << " max_abs_error "
      << format_number(m.max_abs_error) << " over " << m.used << " samples\n";
  write_manifest(c, "metrics", {"metrics.json"}, log);
}

}  // namespace kmlocal::app
