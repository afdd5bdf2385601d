#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "kmlocal/analysis.hpp"
#include "kmlocal/error.hpp"
#include "kmlocal/estimators.hpp"
#include "kmlocal_test/random.hpp"

using namespace kmlocal;
using kmlocal::testing::close_rel;
using kmlocal::testing::Gen;

namespace {

constexpr int kInstances = 100;
constexpr double kTol = 1e-10;

// A random estimation problem: series, conditions (possibly with gaps),
// a kernel, and a handful of grid points inside the data range.
struct Instance {
  SampledSeries series;
  ConditionSeries conditions;
  KernelSpec kernel = KernelSpec::uniform(KernelFamily::Gaussian, 1.0);
  Grid grid;
  int order = 1;
  std::size_t lag = 1;
};

Instance make_instance(Gen& gen, std::size_t max_n = 200, bool gaps = true) {
  Instance in;
  const std::size_t n = gen.size(20, max_n);
  auto x = gen.path(n);
  std::vector<bool> missing(n, false);
  if (gaps && gen.chance(0.5)) missing = gen.mask(n, 0.05);
  for (std::size_t i = 0; i < n; ++i) {
    if (missing[i]) x[i] = std::nan("");
  }
  in.series = SampledSeries(x, missing, gen.uniform(0.01, 1.0));

  const std::size_t dim = gen.size(1, 2);
  std::vector<SampledSeries> chans;
  std::vector<std::string> names;
  std::vector<KernelFamily> fams;
  std::vector<double> hs;
  for (std::size_t d = 0; d < dim; ++d) {
    std::vector<double> c(n);
    // Either the series itself (gaps filled) or an independent channel.
    const bool self = d == 0 && gen.chance(0.5);
    for (std::size_t i = 0; i < n; ++i) c[i] = self && !missing[i] ? x[i] : gen.normal();
    chans.emplace_back(c, in.series.dt);
    names.push_back("c" + std::to_string(d));
    fams.push_back(gen.family());
    hs.push_back(gen.uniform(0.4, 2.0));
  }
  in.conditions = ConditionSeries(names, chans);
  in.kernel = KernelSpec(fams, hs);
  std::vector<std::vector<double>> pts(gen.size(1, 6), std::vector<double>(dim));
  for (auto& p : pts) {
    for (auto& v : p) v = gen.uniform(-1.0, 1.0);
  }
  in.grid = Grid::from_points(pts);
  in.order = static_cast<int>(gen.size(1, 2));
  in.lag = gen.size(1, 3);
  return in;
}

EstimatorOptions low_floor() {
  EstimatorOptions o;
  o.min_effective_count = 2.0;
  return o;
}

// Oracle kernel shapes written out independently of the library.
double oracle_kernel(KernelFamily f, double x, double h) {
  const double u = x / h;
  switch (f) {
    case KernelFamily::Gaussian:
      return std::exp(-u * u / 2.0);
    case KernelFamily::Epanechnikov:
      return std::abs(u) <= 1.0 ? 1.0 - u * u : 0.0;
    case KernelFamily::Rectangular:
      return std::abs(u) <= 1.0 ? 1.0 : 0.0;
  }
  return 0.0;
}

// Raw product-kernel weights per increment start index, zero where unusable.
std::vector<double> full_scan_weights(const Instance& in, std::span<const double> g) {
  const std::size_t count = in.series.size() - in.lag;
  std::vector<double> w(count, 0.0);
  for (std::size_t i = 0; i < count; ++i) {
    if (in.conditions.is_missing(i)) continue;
    std::vector<double> dx(g.size());
    for (std::size_t d = 0; d < g.size(); ++d) dx[d] = in.conditions.value(d, i) - g[d];
    w[i] = product_kernel(in.kernel, dx);
  }
  return w;
}

}  // namespace

TEST(ReductionProperties, ConstantBasisLocalFitEqualsNadarayaWatson) {
  Gen gen(101);
  int compared = 0;
  for (int it = 0; it < kInstances; ++it) {
    const auto in = make_instance(gen);
    const auto nw = conditional_moment_nw(in.series, in.conditions, in.grid, in.kernel, in.order,
                                          in.lag, low_floor());
    const auto loc = local_moment_fit(in.series, in.conditions, in.grid, in.kernel,
                                      make_polynomial_basis(0), in.order, in.lag, low_floor());
    for (std::size_t k = 0; k < in.grid.size(); ++k) {
      ASSERT_EQ(nw[k].valid, loc[k].valid) << "instance " << it;
      if (!nw[k].valid) continue;
      ++compared;
      EXPECT_TRUE(close_rel(loc[k].phi[0], nw[k].value, kTol))
          << loc[k].phi[0] << " vs " << nw[k].value;
      EXPECT_EQ(loc[k].effective_count, nw[k].effective_count);
    }
  }
  EXPECT_GT(compared, 200);
}

TEST(ReductionProperties, UniformWeightsEqualGlobalFit) {
  Gen gen(102);
  for (int it = 0; it < kInstances; ++it) {
    const auto in = make_instance(gen);
    const auto basis = make_polynomial_basis(static_cast<int>(gen.size(0, 2)));
    const std::size_t count = in.series.size() - in.lag;
    const std::vector<double> uniform(count, 1.0);
    LocalCoefficients glob;
    try {
      glob = global_moment_fit(in.series, basis, in.order, in.lag);
    } catch (const SolveRejected&) {
      continue;
    }
    EstimatorOptions opts;
    opts.min_effective_count = 0.0;
    const auto loc = weighted_moment_fit(in.series, in.series, uniform, basis, in.order, in.lag, opts);
    ASSERT_TRUE(loc.valid);
    for (std::size_t j = 0; j < basis.size(); ++j) {
      EXPECT_TRUE(close_rel(loc.phi[j], glob.phi[j], kTol)) << loc.phi[j] << " vs " << glob.phi[j];
    }
  }
}

TEST(ReductionProperties, CoveringRectangularKernelEqualsGlobalFit) {
  Gen gen(103);
  for (int it = 0; it < kInstances; ++it) {
    const auto in = make_instance(gen, 200, false);
    const auto basis = make_polynomial_basis(1);
    const ConditionSeries flat({"c"}, {SampledSeries(gen.values(in.series.size(), 0.0, 1.0), 1.0)});
    const auto loc = local_moment_fit(in.series, flat, Grid::from_points({{0.5}}),
                                      KernelSpec::uniform(KernelFamily::Rectangular, 1.0), basis,
                                      in.order, in.lag);
    const auto glob = global_moment_fit(in.series, basis, in.order, in.lag);
    ASSERT_TRUE(loc[0].valid);
    for (std::size_t j = 0; j < basis.size(); ++j) {
      EXPECT_TRUE(close_rel(loc[0].phi[j], glob.phi[j], kTol));
    }
  }
}

TEST(ReductionProperties, BinningEqualsRectangularNadarayaWatson) {
  Gen gen(104);
  for (int it = 0; it < kInstances; ++it) {
    auto in = make_instance(gen);
    // Axes slightly wider than the data so no sample sits on an outer edge.
    std::vector<GridAxis> axes;
    std::vector<double> half_widths;
    for (std::size_t d = 0; d < in.conditions.dimension(); ++d) {
      const auto& v = in.conditions.channel(d).values;
      const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
      axes.push_back(bin_axis(*lo - 0.013, *hi + 0.017, gen.size(1, 8)));
      half_widths.push_back(axes.back().spacing / 2.0);
    }
    const auto grid = Grid::from_axes(axes);
    const KernelSpec rect(std::vector<KernelFamily>(axes.size(), KernelFamily::Rectangular),
                          half_widths);
    const auto bins = binning_estimate(in.series, in.conditions, grid, in.order, in.lag, low_floor());
    const auto nw =
        conditional_moment_nw(in.series, in.conditions, grid, rect, in.order, in.lag, low_floor());
    double total = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      total += bins[k].effective_count;
      EXPECT_EQ(bins[k].effective_count, nw[k].effective_count);
      ASSERT_EQ(bins[k].valid, nw[k].valid);
      if (bins[k].valid) EXPECT_TRUE(close_rel(bins[k].value, nw[k].value, kTol));
    }
    std::size_t usable = 0;
    for (std::size_t i = 0; i + in.lag < in.series.size(); ++i) {
      if (!in.series.missing[i] && !in.series.missing[i + in.lag] && !in.conditions.is_missing(i)) {
        ++usable;
      }
    }
    EXPECT_EQ(total, static_cast<double>(usable));
  }
}

TEST(LocalFitProperties, RawWeightScaleCancels) {
  Gen gen(105);
  for (int it = 0; it < kInstances; ++it) {
    const auto in = make_instance(gen);
    const auto w = full_scan_weights(in, in.grid.point(0));
    // Scaling up keeps the effective-count floor satisfied.
    const double c = std::exp(gen.uniform(0.0, 10.0));
    auto scaled = w;
    for (auto& x : scaled) x *= c;
    EstimatorOptions opts;
    opts.min_effective_count = 0.0;
    const auto basis = make_polynomial_basis(1);
    const auto a = weighted_moment_fit(in.series, in.series, w, basis, in.order, in.lag, opts);
    const auto b = weighted_moment_fit(in.series, in.series, scaled, basis, in.order, in.lag, opts);
    if (!a.valid) continue;
    ASSERT_TRUE(b.valid);
    for (std::size_t j = 0; j < 2; ++j) EXPECT_TRUE(close_rel(a.phi[j], b.phi[j], kTol));
  }
}

TEST(LocalFitProperties, MatchesExplicitTwoByTwoWeightedLeastSquares) {
  Gen gen(106);
  int compared = 0;
  for (int it = 0; it < kInstances; ++it) {
    const auto in = make_instance(gen, 50);
    const int nf = static_cast<int>(gen.size(1, 2));
    const auto basis = make_polynomial_basis(nf - 1);
    const auto fit = local_moment_fit(in.series, in.conditions, in.grid, in.kernel, basis, in.order,
                                      in.lag, low_floor());
    const auto& x = in.series.values;
    for (std::size_t k = 0; k < in.grid.size(); ++k) {
      if (!fit[k].valid) continue;
      const auto g = in.grid.point(k);
      // Normalised weights and weighted sums, written out by hand.
      std::vector<double> w(x.size() - in.lag, 0.0);
      double total = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (in.series.missing[i] || in.series.missing[i + in.lag] || in.conditions.is_missing(i)) {
          continue;
        }
        double kw = 1.0;
        for (std::size_t d = 0; d < g.size(); ++d) {
          kw *= oracle_kernel(in.kernel.family(d), in.conditions.value(d, i) - g[d],
                              in.kernel.bandwidth(d));
        }
        w[i] = kw;
        total += kw;
      }
      double s0 = 0, s1 = 0, s2 = 0, r0 = 0, r1 = 0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] == 0.0) continue;
        const double om = w[i] / total;
        const double inc = std::pow(x[i + in.lag] - x[i], in.order);
        s0 += om;
        s1 += om * x[i];
        s2 += om * x[i] * x[i];
        r0 += om * inc;
        r1 += om * inc * x[i];
      }
      ++compared;
      if (nf == 1) {
        EXPECT_TRUE(close_rel(fit[k].phi[0], r0 / s0, kTol));
        continue;
      }
      const double det = s0 * s2 - s1 * s1;
      const double phi0 = (s2 * r0 - s1 * r1) / det;
      const double phi1 = (-s1 * r0 + s0 * r1) / det;
      EXPECT_TRUE(close_rel(fit[k].phi[0], phi0, kTol)) << fit[k].phi[0] << " vs " << phi0;
      EXPECT_TRUE(close_rel(fit[k].phi[1], phi1, kTol)) << fit[k].phi[1] << " vs " << phi1;
      const double tau = static_cast<double>(in.lag) * in.series.dt * (in.order == 2 ? 2.0 : 1.0);
      EXPECT_TRUE(close_rel(fit[k].Phi[1], phi1 / tau, kTol));
    }
  }
  EXPECT_GT(compared, 100);
}

TEST(LocalFitProperties, IndexedLookupIsBitIdenticalToFullScan) {
  Gen gen(107);
  for (int it = 0; it < kInstances; ++it) {
    auto in = make_instance(gen);
    // Compact kernels, sometimes with a monotone time-like channel.
    std::vector<KernelFamily> fams;
    std::vector<double> hs;
    for (std::size_t d = 0; d < in.conditions.dimension(); ++d) {
      fams.push_back(gen.chance(0.5) ? KernelFamily::Epanechnikov : KernelFamily::Rectangular);
      hs.push_back(in.kernel.bandwidth(d));
    }
    if (gen.chance(0.5)) {
      std::vector<SampledSeries> chans{in.conditions.channel(0),
                                       time_channel(in.series.size(), 1.0)};
      in.conditions = ConditionSeries({"c0", "t"}, chans);
      fams.resize(1);
      hs.resize(1);
      fams.push_back(KernelFamily::Rectangular);
      hs.push_back(gen.uniform(5.0, 40.0));
      std::vector<std::vector<double>> pts;
      for (int p = 0; p < 4; ++p) {
        pts.push_back({gen.uniform(-1.0, 1.0), gen.uniform(0.0, static_cast<double>(in.series.size()))});
      }
      in.grid = Grid::from_points(pts);
    }
    in.kernel = KernelSpec(fams, hs);
    const auto basis = make_polynomial_basis(1);
    const auto indexed = local_moment_fit(in.series, in.conditions, in.grid, in.kernel, basis,
                                          in.order, in.lag, low_floor());
    for (std::size_t k = 0; k < in.grid.size(); ++k) {
      const auto w = full_scan_weights(in, in.grid.point(k));
      const auto scan =
          weighted_moment_fit(in.series, in.series, w, basis, in.order, in.lag, low_floor());
      EXPECT_EQ(indexed[k].effective_count, scan.effective_count);
      EXPECT_EQ(indexed[k].valid, scan.valid);
      EXPECT_EQ(indexed[k].reason, scan.reason);
      if (scan.valid) {
        EXPECT_EQ(indexed[k].phi, scan.phi);
        EXPECT_EQ(indexed[k].gram_condition, scan.gram_condition);
      }
    }
  }
}

TEST(LocalFitProperties, MaskedConditionValuesAreNeverRead) {
  Gen gen(108);
  for (int it = 0; it < kInstances; ++it) {
    const auto in = make_instance(gen);
    const std::size_t n = in.series.size();
    const auto mask = gen.mask(n, 0.2);
    std::vector<SampledSeries> a, b;
    for (std::size_t d = 0; d < in.conditions.dimension(); ++d) {
      auto v = in.conditions.channel(d).values;
      a.emplace_back(v, mask, 1.0);
      for (std::size_t i = 0; i < n; ++i) {
        if (mask[i]) v[i] = gen.uniform(-1.0, 1.0);
      }
      b.emplace_back(v, mask, 1.0);
    }
    const ConditionSeries ca(in.conditions.names(), a), cb(in.conditions.names(), b);
    const auto basis = make_polynomial_basis(1);
    const auto fa = local_moment_fit(in.series, ca, in.grid, in.kernel, basis, in.order, in.lag,
                                     low_floor());
    const auto fb = local_moment_fit(in.series, cb, in.grid, in.kernel, basis, in.order, in.lag,
                                     low_floor());
    for (std::size_t k = 0; k < in.grid.size(); ++k) {
      EXPECT_EQ(fa[k].effective_count, fb[k].effective_count);
      EXPECT_EQ(fa[k].valid, fb[k].valid);
      if (fa[k].valid) EXPECT_EQ(fa[k].phi, fb[k].phi);
    }
  }
}

TEST(LocalFitProperties, EffectiveCountShrinksWithCompactBandwidth) {
  Gen gen(109);
  for (int it = 0; it < kInstances; ++it) {
    const auto in = make_instance(gen);
    const auto family = gen.chance(0.5) ? KernelFamily::Epanechnikov : KernelFamily::Rectangular;
    const std::size_t dim = in.conditions.dimension();
    std::vector<double> wide(dim), narrow(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      wide[d] = gen.uniform(0.2, 2.0);
      narrow[d] = wide[d] * gen.uniform(0.1, 1.0);
    }
    const std::vector<KernelFamily> fams(dim, family);
    const auto basis = make_polynomial_basis(0);
    const auto a = local_moment_fit(in.series, in.conditions, in.grid, KernelSpec(fams, wide), basis,
                                    1, in.lag);
    const auto b = local_moment_fit(in.series, in.conditions, in.grid, KernelSpec(fams, narrow),
                                    basis, 1, in.lag);
    for (std::size_t k = 0; k < in.grid.size(); ++k) {
      EXPECT_LE(b[k].effective_count, a[k].effective_count);
    }
  }
}

TEST(LocalFitProperties, FixedPointShiftsWithTheData) {
  Gen gen(110);
  for (int it = 0; it < kInstances; ++it) {
    // Noiseless relaxation toward 0, then the same path shifted by s.
    const double dt = gen.uniform(0.01, 0.2);
    const double rate = gen.uniform(0.2, 2.0);
    const std::size_t n = gen.size(50, 200);
    const double x0 = gen.uniform(1.0, 3.0) * (gen.chance(0.5) ? 1.0 : -1.0);
    std::vector<double> x{x0};
    for (std::size_t i = 1; i < n; ++i) x.push_back(x.back() - dt * rate * x.back());
    const double s = gen.uniform(-5.0, 5.0);
    auto shifted = x;
    for (auto& v : shifted) v += s;

    const double g = x0 * gen.uniform(0.3, 0.9);
    const auto kernel = KernelSpec::uniform(KernelFamily::Gaussian, std::abs(x0) * 0.5);
    const auto basis = make_polynomial_basis(1);
    const SampledSeries a(x, dt), b(shifted, dt);
    const auto fa = local_moment_fit(a, ConditionSeries({"x"}, {a}), Grid::from_points({{g}}),
                                     kernel, basis, 1, 1);
    const auto fb = local_moment_fit(b, ConditionSeries({"x"}, {b}),
                                     Grid::from_points({{g + s}}), kernel, basis, 1, 1);
    ASSERT_TRUE(fa[0].valid && fb[0].valid);
    const auto la = fixed_point(fa[0], basis);
    const auto lb = fixed_point(fb[0], basis);
    ASSERT_TRUE(la.fixed_point && lb.fixed_point);
    EXPECT_NEAR(*lb.fixed_point - *la.fixed_point, s, 1e-9 * (1.0 + std::abs(s)));
    EXPECT_NEAR(la.Phi1, -rate, 1e-9);
  }
}

TEST(KmLimitProperties, PhiIsPhiOverTauAndFactorial) {
  Gen gen(111);
  for (int it = 0; it < kInstances; ++it) {
    const auto in = make_instance(gen);
    const auto fit = local_moment_fit(in.series, in.conditions, in.grid, in.kernel,
                                      make_polynomial_basis(1), in.order, in.lag, low_floor());
    const double tau = static_cast<double>(in.lag) * in.series.dt;
    for (const auto& f : fit) {
      EXPECT_EQ(f.lag_steps, in.lag);
      if (!f.valid) continue;
      for (std::size_t j = 0; j < f.phi.size(); ++j) {
        EXPECT_TRUE(close_rel(f.Phi[j], f.phi[j] / (tau * factorial(in.order)), 1e-14));
      }
    }
  }
}
