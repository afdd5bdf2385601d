#include <cmath>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "kmlocal/analysis.hpp"
#include "kmlocal/ingest.hpp"
#include "kmlocal/io.hpp"
#include "kmlocal/simulate.hpp"
#include "kmlocal_test/random.hpp"

using namespace kmlocal;
using kmlocal::testing::Gen;

namespace {

constexpr int kInstances = 100;

ProcessSpec linear_process(Gen& gen) {
  ProcessSpec p;
  p.name = "linear";
  p.channel_names = {"x"};
  const double a = gen.uniform(0.1, 2.0);
  const double d = gen.uniform(0.1, 1.5);
  p.drift = [a](std::span<const double> s, double, std::span<double> out) { out[0] = -a * s[0]; };
  p.diffusion = [d](std::span<const double>, double, std::span<double> out) { out[0] = d; };
  p.x0 = {gen.uniform(-1.0, 1.0)};
  p.dt = gen.uniform(0.01, 0.5);
  p.n = gen.size(2, 500);
  p.seed = gen.engine()();
  return p;
}

RawRecords random_records(Gen& gen, std::size_t n) {
  RawRecords r;
  r.names = {"a", "b"};
  r.channels.assign(2, {});
  double t = gen.uniform(0.0, 1e6);
  for (std::size_t i = 0; i < n; ++i) {
    t += gen.uniform(0.1, 30.0);
    r.timestamps.push_back(t);
    for (auto& ch : r.channels) ch.push_back(gen.chance(0.1) ? std::nan("") : gen.normal(5.0));
  }
  return r;
}

}  // namespace

TEST(SimulationProperties, SameSeedSamePathBitForBit) {
  Gen gen(201);
  for (int it = 0; it < kInstances; ++it) {
    const auto p = linear_process(gen);
    const auto a = euler_maruyama(p);
    const auto b = euler_maruyama(p);
    ASSERT_EQ(a.channels[0].values.size(), p.n);
    EXPECT_EQ(a.channels[0].values, b.channels[0].values);
    EXPECT_EQ(a.channels[0].values[0], p.x0[0]);
  }
}

TEST(SimulationProperties, ResidualNoiseHasIntensityTwo) {
  // Recover Gamma_i from consecutive states and check its first two moments.
  Gen gen(202);
  double sum = 0.0, sum_sq = 0.0;
  std::size_t count = 0;
  for (int it = 0; it < kInstances; ++it) {
    auto p = linear_process(gen);
    p.n = 2000;
    const auto x = euler_maruyama(p).channels[0].values;
    std::vector<double> drift(1), diff(1);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      const std::vector<double> s{x[i]};
      p.drift(s, static_cast<double>(i) * p.dt, drift);
      p.diffusion(s, static_cast<double>(i) * p.dt, diff);
      const double g = (x[i + 1] - x[i] - p.dt * drift[0]) / std::sqrt(p.dt * diff[0]);
      sum += g;
      sum_sq += g * g;
      ++count;
    }
  }
  const double n = static_cast<double>(count);
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  // Standard errors: sqrt(2 / n) for the mean, 2 sqrt(2 / n) for the variance.
  EXPECT_NEAR(mean, 0.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(var, kNoiseIntensity, 4.0 * 2.0 * std::sqrt(2.0 / n));
}

TEST(SimulationProperties, DifferentSeedsDiffer) {
  Gen gen(203);
  for (int it = 0; it < kInstances; ++it) {
    auto p = linear_process(gen);
    p.n = std::max<std::size_t>(p.n, 10);
    auto q = p;
    q.seed = p.seed + 1;
    EXPECT_NE(euler_maruyama(p).channels[0].values, euler_maruyama(q).channels[0].values);
  }
}

TEST(AggregationProperties, OneRecordPerWindowIsIdentity) {
  Gen gen(204);
  for (int it = 0; it < kInstances; ++it) {
    const double w = gen.uniform(0.5, 60.0);
    const std::size_t n = gen.size(1, 300);
    const double start = std::floor(gen.uniform(0.0, 1e5)) * w;
    RawRecords r;
    r.names = {"v"};
    r.channels.assign(1, {});
    std::vector<double> expected;
    for (std::size_t k = 0; k < n; ++k) {
      // One record somewhere inside each window, away from the edges.
      r.timestamps.push_back(start + (static_cast<double>(k) + gen.uniform(0.05, 0.95)) * w);
      expected.push_back(gen.normal(10.0));
      r.channels[0].push_back(expected.back());
    }
    const auto a = aggregate(r, w);
    ASSERT_EQ(a.size(), n);
    EXPECT_EQ(a.channel("v").values, expected);
    EXPECT_EQ(a.channel("v").missing_count(), 0u);
  }
}

TEST(AggregationProperties, MatchesDirectWindowMeans) {
  Gen gen(205);
  for (int it = 0; it < kInstances; ++it) {
    const auto r = random_records(gen, gen.size(1, 300));
    const double w = gen.uniform(5.0, 120.0);
    const auto a = aggregate(r, w);
    const double start = std::floor(r.timestamps.front() / w) * w;
    EXPECT_EQ(a.start, start);
    for (std::size_t c = 0; c < r.names.size(); ++c) {
      const auto& s = a.channel(r.names[c]);
      std::vector<double> sums(s.size(), 0.0), counts(s.size(), 0.0);
      for (std::size_t i = 0; i < r.size(); ++i) {
        const double v = r.channels[c][i];
        if (std::isnan(v)) continue;
        const auto k = static_cast<std::size_t>(std::floor((r.timestamps[i] - start) / w + 1e-9));
        ASSERT_LT(k, s.size());
        sums[k] += v;
        counts[k] += 1.0;
      }
      for (std::size_t k = 0; k < s.size(); ++k) {
        ASSERT_EQ(s.missing[k], counts[k] == 0.0);
        if (counts[k] > 0.0) EXPECT_NEAR(s.values[k], sums[k] / counts[k], 1e-12 * (1.0 + std::abs(s.values[k])));
      }
    }
  }
}

TEST(AggregationProperties, WholeWindowShiftMovesOnlyTheClock) {
  Gen gen(206);
  for (int it = 0; it < kInstances; ++it) {
    // Integer timestamps and windows keep the shift exact.
    RawRecords r;
    r.names = {"v"};
    r.channels.assign(1, {});
    double t = std::floor(gen.uniform(0.0, 1e5));
    for (std::size_t i = 0, n = gen.size(1, 200); i < n; ++i) {
      t += static_cast<double>(gen.size(1, 40));
      r.timestamps.push_back(t);
      r.channels[0].push_back(gen.normal());
    }
    const double w = static_cast<double>(gen.size(1, 60));
    auto shifted = r;
    const double s = w * static_cast<double>(gen.size(1, 1000));
    for (auto& ts : shifted.timestamps) ts += s;
    const auto a = aggregate(r, w);
    const auto b = aggregate(shifted, w);
    EXPECT_EQ(b.start, a.start + s);
    EXPECT_EQ(a.channel("v").values.size(), b.channel("v").values.size());
    EXPECT_EQ(a.channel("v").missing, b.channel("v").missing);
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (!a.channel("v").missing[k]) {
        EXPECT_EQ(a.channel("v").values[k], b.channel("v").values[k]);
      }
    }
  }
}

TEST(AggregationProperties, CsvRoundTripAtNativeStepIsIdentity) {
  Gen gen(207);
  for (int it = 0; it < kInstances; ++it) {
    const std::size_t n = gen.size(2, 200);
    const double dt = static_cast<double>(gen.size(1, 10));
    std::vector<std::string> names{"p", "q"};
    std::vector<SampledSeries> chans;
    for (std::size_t c = 0; c < 2; ++c) {
      auto v = gen.values(n, -1e3, 1e3);
      auto m = gen.mask(n, 0.1);
      // Channel "p" is always present so every row keeps a timestamp.
      if (c == 0) m.assign(n, false);
      for (std::size_t i = 0; i < n; ++i) {
        if (m[i]) v[i] = std::nan("");
      }
      chans.emplace_back(v, m, dt);
    }
    std::stringstream buf;
    write_series_csv(buf, names, chans, 0.0);
    const auto raw = parse_csv(buf, "t", names);
    ASSERT_EQ(raw.size(), n);
    const auto a = aggregate(raw, dt);
    ASSERT_EQ(a.size(), n);
    for (std::size_t c = 0; c < 2; ++c) {
      const auto& s = a.channel(names[c]);
      EXPECT_EQ(s.missing, chans[c].missing);
      for (std::size_t i = 0; i < n; ++i) {
        if (!s.missing[i]) EXPECT_EQ(s.values[i], chans[c].values[i]);
      }
    }
  }
}

TEST(AnalysisProperties, FixedPointZeroesTheDriftLine) {
  Gen gen(208);
  const auto basis = make_polynomial_basis(1);
  for (int it = 0; it < kInstances; ++it) {
    LocalCoefficients c;
    c.valid = true;
    c.reason = Rejection::None;
    c.Phi = {gen.normal(50.0), gen.normal(2.0)};
    c.phi = c.Phi;
    const auto line = fixed_point(c, basis);
    ASSERT_TRUE(line.valid);
    ASSERT_TRUE(line.fixed_point.has_value());
    EXPECT_NEAR(line.Phi0 + line.Phi1 * *line.fixed_point, 0.0, 1e-9 * (1.0 + std::abs(line.Phi0)));
    EXPECT_EQ(line.stable, c.Phi[1] < 0.0);
  }
}

TEST(AnalysisProperties, ErrorMetricsAreConsistent) {
  Gen gen(209);
  for (int it = 0; it < kInstances; ++it) {
    std::vector<DriftSample> samples(gen.size(1, 50));
    for (auto& s : samples) {
      s.x = gen.uniform(-2.0, 2.0);
      s.value = gen.normal();
      s.valid = gen.chance(0.8);
    }
    samples.front().valid = true;
    const double slope = gen.normal();
    const auto m = error_metrics(samples, [slope](double x, std::span<const double>) { return slope * x; });
    EXPECT_GE(m.mean_abs_error, 0.0);
    EXPECT_LE(m.mean_abs_error, m.max_abs_error);
    EXPECT_EQ(m.used + m.excluded, samples.size());
    EXPECT_EQ(m.residuals.size(), m.used);
    double sum = 0.0;
    for (double r : m.residuals) sum += std::abs(r);
    EXPECT_NEAR(m.mean_abs_error, sum / static_cast<double>(m.used), 1e-12);
  }
}
