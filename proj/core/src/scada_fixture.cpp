#include "kmlocal/scada_fixture.hpp"

#include <cmath>
#include <random>

#include "kmlocal/error.hpp"

namespace kmlocal {

double ScadaFixtureSpec::power_curve(double u, double elapsed) const {
  double p = 100.0 / (1.0 + std::exp(-(u - curve_center) / curve_width));
  if (!std::isnan(regulation_day) && elapsed >= regulation_day * 86400.0) {
    p = std::min(p, regulated_cap);
  }
  return p;
}

RawRecords generate_scada(const ScadaFixtureSpec& spec) {
  if (!(spec.days > 0.0) || !(spec.record_interval > 0.0) || !(spec.rated_power > 0.0) ||
      !(spec.wind_correlation_time > 0.0) || !(spec.wind_sd >= 0.0) ||
      !(spec.relaxation_rate > 0.0) || !(spec.power_diffusion >= 0.0) ||
      !(spec.curve_width > 0.0) || !(spec.timestamp_jitter >= 0.0) ||
      !(spec.timestamp_jitter < 0.5 * spec.record_interval)) {
    throw DomainError("invalid SCADA fixture parameters");
  }
  const double dt = spec.record_interval;
  const auto n = static_cast<std::size_t>(spec.days * 86400.0 / dt);

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gamma(0.0, std::sqrt(kNoiseIntensity));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> outage(1.0 / spec.outage_mean_duration);

  RawRecords rec;
  rec.names = {"wind_speed", "power"};
  rec.channels.resize(2);
  rec.timestamps.reserve(n);
  rec.channels[0].reserve(n);
  rec.channels[1].reserve(n);

  const double wind_diffusion = spec.wind_sd * spec.wind_sd / spec.wind_correlation_time;
  double u = spec.wind_mean;
  double p = spec.power_curve(u, 0.0);
  double outage_until = -1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double elapsed = static_cast<double>(k) * dt;
    const double jitter = spec.timestamp_jitter * (2.0 * unit(rng) - 1.0);
    const double lost = unit(rng);
    const double outage_draw = unit(rng);
    if (elapsed >= outage_until && outage_draw < spec.outage_probability) {
      outage_until = elapsed + outage(rng);
    }
    if (elapsed >= outage_until && lost >= spec.drop_probability) {
      rec.timestamps.push_back(spec.start_epoch + elapsed + jitter);
      rec.channels[0].push_back(std::abs(u));
      rec.channels[1].push_back(p * spec.rated_power / 100.0);
    }
    const double target = spec.power_curve(std::abs(u), elapsed);
    u += -dt / spec.wind_correlation_time * (u - spec.wind_mean) +
         std::sqrt(dt * wind_diffusion) * gamma(rng);
    p += -dt * spec.relaxation_rate * (p - target) +
         std::sqrt(dt * spec.power_diffusion) * gamma(rng);
  }
  return rec;
}

}  // namespace kmlocal
