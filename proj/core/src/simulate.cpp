#include "kmlocal/simulate.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "kmlocal/error.hpp"

namespace kmlocal {

void ProcessSpec::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("process dt must be positive");
  if (n < 2) throw DomainError("process needs at least 2 samples");
  if (x0.size() != 1 && x0.size() != 2) throw DomainError("process dimension must be 1 or 2");
  if (channel_names.size() != x0.size()) {
    throw ShapeError("process has " + std::to_string(x0.size()) + " dimensions but " +
                     std::to_string(channel_names.size()) + " channel names");
  }
  if (!drift || !diffusion) throw DomainError("process drift and diffusion must be set");
}

const SampledSeries& SimulatedPath::channel(std::string_view name) const {
  for (std::size_t d = 0; d < names.size(); ++d) {
    if (names[d] == name) return channels[d];
  }
  throw LookupError("simulated path has no channel '" + std::string(name) + "'");
}

SimulatedPath euler_maruyama(const ProcessSpec& spec) {
  spec.validate();
  const std::size_t dim = spec.dimension();
  std::vector<std::vector<double>> values(dim, std::vector<double>(spec.n));

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gamma(0.0, std::sqrt(kNoiseIntensity));

  std::vector<double> state = spec.x0;
  std::vector<double> d1(dim), d2(dim);
  for (std::size_t d = 0; d < dim; ++d) values[d][0] = state[d];

  for (std::size_t i = 0; i + 1 < spec.n; ++i) {
    const double t = static_cast<double>(i) * spec.dt;
    spec.drift(state, t, d1);
    spec.diffusion(state, t, d2);
    for (std::size_t d = 0; d < dim; ++d) {
      if (d2[d] < 0.0 || !std::isfinite(d2[d])) {
        std::ostringstream msg;
        msg << "diffusion of '" << spec.channel_names[d] << "' is " << d2[d] << " at index " << i
            << ", state (";
        for (std::size_t k = 0; k < dim; ++k) msg << (k ? ", " : "") << state[k];
        msg << ")";
        throw SimulationError(msg.str(), i, state);
      }
    }
    for (std::size_t d = 0; d < dim; ++d) {
      state[d] += spec.dt * d1[d] + std::sqrt(spec.dt * d2[d]) * gamma(rng);
      values[d][i + 1] = state[d];
    }
  }

  SimulatedPath path;
  path.names = spec.channel_names;
  for (auto& v : values) path.channels.emplace_back(std::move(v), spec.dt);
  return path;
}

namespace {

void unit_diffusion(std::span<const double>, double, std::span<double> out) {
  for (double& v : out) v = 1.0;
}

ProcessSpec base_process(std::string name, std::vector<std::string> channels) {
  ProcessSpec p;
  p.name = std::move(name);
  p.x0.assign(channels.size(), 0.0);
  p.channel_names = std::move(channels);
  p.diffusion = unit_diffusion;
  p.dt = 0.1;
  p.n = 100000;
  return p;
}

}  // namespace

const std::vector<std::string>& builtin_process_names() {
  static const std::vector<std::string> names{"ou", "piecewise", "coupled2d", "nonstationary2d"};
  return names;
}

ProcessSpec builtin_process(std::string_view name) {
  if (name == "ou") {
    auto p = base_process("ou", {"x"});
    p.drift = [](std::span<const double> s, double, std::span<double> out) { out[0] = -s[0]; };
    return p;
  }
  if (name == "piecewise") {
    auto p = base_process("piecewise", {"x"});
    p.drift = [](std::span<const double> s, double, std::span<double> out) {
      out[0] = s[0] <= 0.0 ? -0.5 * s[0] : -2.0 * s[0];
    };
    return p;
  }
  if (name == "coupled2d") {
    auto p = base_process("coupled2d", {"x", "y"});
    p.drift = [](std::span<const double> s, double, std::span<double> out) {
      out[0] = -std::abs(s[1]) * s[0];
      out[1] = -0.25 * s[1];
    };
    return p;
  }
  if (name == "nonstationary2d") {
    auto p = base_process("nonstationary2d", {"x", "y"});
    p.drift = [](std::span<const double> s, double t, std::span<double> out) {
      const double shift = t <= 5000.0 ? 0.0 : 2.0;
      out[0] = -std::abs(s[1]) * (s[0] - shift);
      out[1] = -0.25 * s[1];
    };
    return p;
  }
  std::string valid;
  for (const auto& n : builtin_process_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw LookupError("unknown process '" + std::string(name) + "' (valid: " + valid + ")");
}

}  // namespace kmlocal
