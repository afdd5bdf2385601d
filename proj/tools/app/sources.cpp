#include "app/sources.hpp"

#include <cmath>

#include "kmlocal/error.hpp"
#include "kmlocal/scada_fixture.hpp"
#include "kmlocal/simulate.hpp"

namespace kmlocal::app {

namespace {

double polyval(const std::vector<double>& coeffs, double x) {
  double v = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * x + *it;
  return v;
}

Dataset simulate_dataset(const SimulateSource& s, std::uint64_t seed) {
  ProcessSpec spec;
  if (s.custom) {
    spec.name = "custom";
    spec.channel_names = {"x"};
    spec.drift = [c = s.custom->drift](std::span<const double> st, double, std::span<double> out) {
      out[0] = polyval(c, st[0]);
    };
    spec.diffusion = [c = s.custom->diffusion](std::span<const double> st, double,
                                                std::span<double> out) { out[0] = polyval(c, st[0]); };
    spec.x0 = {0.0};
  } else {
    spec = builtin_process(s.process);
  }
  spec.n = s.n;
  spec.dt = s.dt;
  spec.seed = seed;
  if (s.x0) spec.x0 = *s.x0;
  auto path = euler_maruyama(spec);

  Dataset d;
  d.dt = s.dt;
  d.names = path.names;
  d.channels = std::move(path.channels);
  d.names.emplace_back("t");
  d.channels.push_back(time_channel(s.n, s.dt));
  return d;
}

Dataset aligned_dataset(const AlignedSeries& aligned) {
  Dataset d;
  d.dt = aligned.window;
  d.start = aligned.start;
  d.names = aligned.names;
  d.channels = aligned.channels;
  d.names.emplace_back("t");
  d.channels.push_back(aligned.time_channel());
  return d;
}

}  // namespace

const SampledSeries& Dataset::channel(std::string_view name) const {
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (names[k] == name) return channels[k];
  }
  throw LookupError("dataset has no channel '" + std::string(name) + "'");
}

Dataset load_source(const RunConfig& config) {
  if (const auto* sim = std::get_if<SimulateSource>(&config.source)) {
    return simulate_dataset(*sim, config.seed);
  }
  if (const auto* csv = std::get_if<CsvSource>(&config.source)) {
    auto records = load_csv(csv->path, csv->time_column, csv->channels);
    if (csv->rated_power) {
      to_percent_of_rated(records, csv->rated_power->channel, csv->rated_power->rated);
    }
    return aligned_dataset(aggregate(records, csv->window));
  }
  const auto& demo = std::get<ScadaDemoSource>(config.source);
  ScadaFixtureSpec spec;
  spec.days = demo.days;
  spec.rated_power = demo.rated_power;
  spec.regulation_day = demo.regulation_day.value_or(std::nan(""));
  spec.seed = config.seed;
  auto raw = generate_scada(spec);
  auto records = raw;
  to_percent_of_rated(records, "power", demo.rated_power);
  auto d = aligned_dataset(aggregate(records, demo.window));
  d.raw = std::move(raw);
  return d;
}

EstimationInput estimation_input(const RunConfig& config, const Dataset& data) {
  std::vector<std::string> used{config.target, config.dependency_channel()};
  for (const auto& c : config.conditions) used.push_back(c.channel);

  const std::size_t n = data.channel(config.target).size();
  std::vector<bool> missing(n, false);
  for (const auto& name : used) {
    const auto& ch = data.channel(name);
    for (std::size_t i = 0; i < n; ++i) {
      if (ch.missing[i]) missing[i] = true;
    }
  }
  const auto masked = [&](const std::string& name) {
    const auto& ch = data.channel(name);
    return SampledSeries(ch.values, missing, ch.dt);
  };

  EstimationInput input{masked(config.target), masked(config.dependency_channel()), {}};
  if (!config.conditions.empty()) {
    std::vector<SampledSeries> conds;
    for (const auto& c : config.conditions) conds.push_back(masked(c.channel));
    input.conditions = ConditionSeries(config.condition_names(), std::move(conds));
  }
  return input;
}

}  // namespace kmlocal::app
