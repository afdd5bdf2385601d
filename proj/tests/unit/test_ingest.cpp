#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "kmlocal/error.hpp"
#include "kmlocal/ingest.hpp"
#include "kmlocal/scada_fixture.hpp"

using namespace kmlocal;

namespace {

RawRecords parse(const std::string& text, std::vector<std::string> channels = {"u", "p"}) {
  std::istringstream in(text);
  return parse_csv(in, "time", channels);
}

RawRecords records(std::vector<double> t, std::vector<double> v) {
  RawRecords r;
  r.timestamps = std::move(t);
  r.names = {"v"};
  r.channels = {std::move(v)};
  return r;
}

}  // namespace

TEST(ParseCsv, WellFormedRowsInOrder) {
  const auto r = parse("time,u,p\n0,1.5,10\n5,2.5,20\n10,3.5,30\n");
  EXPECT_EQ(r.timestamps, (std::vector<double>{0, 5, 10}));
  EXPECT_EQ(r.channel("u"), (std::vector<double>{1.5, 2.5, 3.5}));
  EXPECT_EQ(r.channel("p"), (std::vector<double>{10, 20, 30}));
}

TEST(ParseCsv, ShuffledRowsAreSorted) {
  const auto r = parse("time,u,p\n10,3.5,30\n0,1.5,10\n5,2.5,20\n");
  EXPECT_EQ(r.timestamps, (std::vector<double>{0, 5, 10}));
  EXPECT_EQ(r.channel("u"), (std::vector<double>{1.5, 2.5, 3.5}));
}

TEST(ParseCsv, MissingTimeColumnIsNamed) {
  try {
    std::istringstream in("stamp,u,p\n0,1,2\n");
    parse_csv(in, "time", {"u"});
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("'time'"), std::string::npos);
  }
}

TEST(ParseCsv, MissingChannelColumnIsNamed) {
  try {
    parse("time,u\n0,1\n");
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("'p'"), std::string::npos);
  }
}

TEST(ParseCsv, UnparseableRowReportsLine) {
  try {
    parse("time,u,p\n0,1,2\n5,abc,3\n");
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  try {
    parse("time,u,p\n0,1,2\nnot-a-time,1,3\n");
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse("time,u,p\n0,1\n"), InputError);
}

TEST(ParseCsv, AbsentCellsAreNaN) {
  const auto r = parse("time,u,p\n0,,NA\n1,nan,2\n");
  EXPECT_TRUE(std::isnan(r.channel("u")[0]));
  EXPECT_TRUE(std::isnan(r.channel("p")[0]));
  EXPECT_TRUE(std::isnan(r.channel("u")[1]));
  EXPECT_EQ(r.channel("p")[1], 2.0);
}

TEST(ParseCsv, DuplicateTimestampsAveraged) {
  const auto r = parse("time,u,p\n5,1,\n0,0,0\n5,3,8\n");
  EXPECT_EQ(r.timestamps, (std::vector<double>{0, 5}));
  EXPECT_EQ(r.channel("u")[1], 2.0);
  EXPECT_EQ(r.channel("p")[1], 8.0);
}

TEST(ParseCsv, QuotedFieldsAndExtraColumns) {
  const auto r = parse("note,time,u,p\n\"a, \"\"b\"\"\",0,1,2\n");
  EXPECT_EQ(r.size(), 1u);
  EXPECT_EQ(r.channel("u")[0], 1.0);
}

TEST(ParseTimestamp, NumericAndIso) {
  EXPECT_EQ(parse_timestamp("12.5"), 12.5);
  EXPECT_EQ(parse_timestamp("2017-01-01T00:00:05Z"), 1483228805.0);
  EXPECT_EQ(parse_timestamp("2017-01-01 00:00:05"), 1483228805.0);
  EXPECT_EQ(parse_timestamp("1970-01-02T00:00:00.25Z"), 86400.25);
  EXPECT_EQ(parse_timestamp("2017-01-01T01:00:00+01:00"), 1483228800.0);
  EXPECT_EQ(parse_timestamp("2016-02-29T00:00:00Z"), 1456704000.0);
  EXPECT_THROW(parse_timestamp("2017-02-30T00:00:00Z"), InputError);
  EXPECT_THROW(parse_timestamp("yesterday"), InputError);
}

TEST(LoadCsv, ReadsFile) {
  const auto path = std::filesystem::temp_directory_path() / "kmlocal_ingest_test.csv";
  {
    std::ofstream out(path);
    out << "time,u,p\n2017-01-01T00:00:10Z,2,3\n2017-01-01T00:00:00Z,1,2\n";
  }
  const auto r = load_csv(path, "time", {"u", "p"});
  EXPECT_EQ(r.timestamps, (std::vector<double>{1483228800.0, 1483228810.0}));
  std::filesystem::remove(path);
  EXPECT_THROW(load_csv(path, "time", {"u"}), InputError);
}

TEST(Aggregate, InWindowMean) {
  const auto a = aggregate(records({0.0, 5.0}, {1.0, 3.0}), 10.0);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a.channel("v").values[0], 2.0);
  EXPECT_FALSE(a.channel("v").missing[0]);
  EXPECT_EQ(a.channel("v").dt, 10.0);
}

TEST(Aggregate, EmptyWindowIsMissing) {
  const auto a = aggregate(records({0.0, 25.0}, {1.0, 3.0}), 10.0);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a.channel("v").missing, (std::vector<bool>{false, true, false}));
  EXPECT_EQ(a.channel("v").values[2], 3.0);
}

TEST(Aggregate, SingleRecord) {
  const auto a = aggregate(records({42.0}, {7.0}), 10.0);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a.channel("v").missing_count(), 0u);
  EXPECT_EQ(a.start, 40.0);
}

TEST(Aggregate, Errors) {
  EXPECT_THROW(aggregate(RawRecords{}, 10.0), DomainError);
  EXPECT_THROW(aggregate(records({0.0}, {1.0}), 0.0), DomainError);
}

TEST(Aggregate, WindowBoundaryBelongsToNextWindow) {
  const auto a = aggregate(records({0.0, 10.0, 19.0}, {1.0, 5.0, 7.0}), 10.0);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a.channel("v").values[0], 1.0);
  EXPECT_EQ(a.channel("v").values[1], 6.0);
}

TEST(Aggregate, TimeChannelCountsFromStart) {
  const auto a = aggregate(records({100.0, 130.0}, {1.0, 2.0}), 10.0);
  EXPECT_EQ(a.time_channel().values, (std::vector<double>{0.0, 10.0, 20.0, 30.0}));
}

TEST(AlignedView, UnionOfMissingMasks) {
  RawRecords r;
  r.timestamps = {0.0, 10.0, 20.0};
  r.names = {"u", "p"};
  r.channels = {{1.0, NAN, 3.0}, {1.0, 2.0, NAN}};
  const auto a = aggregate(r, 10.0);
  EXPECT_EQ(a.channel("u").missing, (std::vector<bool>{false, true, false}));
  const auto view = aligned_view(a, {"u", "p"});
  EXPECT_EQ(view.channel("u").missing, (std::vector<bool>{false, true, true}));
  EXPECT_EQ(view.channel("p").missing, (std::vector<bool>{false, true, true}));
  EXPECT_TRUE(view.has_channel("p"));
  EXPECT_FALSE(view.has_channel("q"));
  EXPECT_THROW(view.channel("q"), LookupError);
}

TEST(PercentOfRated, AffineTransform) {
  auto r = records({0.0, 1.0}, {1500.0, 3000.0});
  to_percent_of_rated(r, "v", 3000.0);
  EXPECT_EQ(r.channel("v"), (std::vector<double>{50.0, 100.0}));
  EXPECT_THROW(to_percent_of_rated(r, "v", 0.0), DomainError);
  EXPECT_THROW(to_percent_of_rated(r, "w", 1.0), LookupError);
}

TEST(ScadaFixture, ShapeAndDeterminism) {
  ScadaFixtureSpec spec;
  spec.days = 0.5;
  const auto a = generate_scada(spec);
  const auto b = generate_scada(spec);
  EXPECT_EQ(a.names, (std::vector<std::string>{"wind_speed", "power"}));
  EXPECT_EQ(a.timestamps, b.timestamps);
  EXPECT_EQ(a.channel("power"), b.channel("power"));
  // Roughly 2% of 8640 slots dropped, timestamps strictly increasing.
  EXPECT_GT(a.size(), 8000u);
  EXPECT_LT(a.size(), 8640u);
  for (std::size_t i = 1; i < a.size(); ++i) EXPECT_GT(a.timestamps[i], a.timestamps[i - 1]);
  for (double u : a.channel("wind_speed")) EXPECT_GE(u, 0.0);
}

TEST(ScadaFixture, PowerCurveAndRegulation) {
  ScadaFixtureSpec spec;
  EXPECT_DOUBLE_EQ(spec.power_curve(spec.curve_center, 0.0), 50.0);
  EXPECT_GT(spec.power_curve(20.0, 0.0), 99.9);
  spec.regulation_day = 10.0;
  EXPECT_GT(spec.power_curve(20.0, 9.9 * 86400.0), 99.9);
  EXPECT_EQ(spec.power_curve(20.0, 10.0 * 86400.0), 70.0);
  EXPECT_DOUBLE_EQ(spec.power_curve(spec.curve_center, 11.0 * 86400.0), 50.0);
}
