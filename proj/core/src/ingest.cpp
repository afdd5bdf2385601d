#include "kmlocal/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>

#include "kmlocal/error.hpp"

namespace kmlocal {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

bool is_absent(std::string_view s) {
  s = trim(s);
  return s.empty() || s == "NA" || s == "nan" || s == "NaN" || s == "null";
}

// RFC 4180 style field splitting with double-quote escaping.
std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  return fields;
}

std::size_t column_index(const std::vector<std::string>& header, std::string_view name) {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (trim(header[k]) == name) return k;
  }
  throw InputError("column '" + std::string(name) + "' not found in CSV header", 1);
}

}  // namespace

double parse_timestamp(std::string_view text) {
  const auto s = trim(text);
  double numeric = 0.0;
  if (parse_double(s, numeric)) {
    if (!std::isfinite(numeric)) throw InputError("timestamp is not finite");
    return numeric;
  }
  // YYYY-MM-DD[T ]hh:mm:ss[.fff][Z|+hh:mm|-hh:mm]
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') ||
      s[13] != ':' || s[16] != ':' || !parse_int(s.substr(0, 4), y) ||
      !parse_int(s.substr(5, 2), mo) || !parse_int(s.substr(8, 2), d) ||
      !parse_int(s.substr(11, 2), h) || !parse_int(s.substr(14, 2), mi)) {
    throw InputError("unparseable timestamp '" + std::string(s) + "'");
  }
  std::size_t pos = 17;
  std::size_t sec_end = pos;
  while (sec_end < s.size() && (std::isdigit(static_cast<unsigned char>(s[sec_end])) ||
                                s[sec_end] == '.')) {
    ++sec_end;
  }
  double sec = 0.0;
  if (!parse_double(s.substr(pos, sec_end - pos), sec)) {
    throw InputError("unparseable timestamp '" + std::string(s) + "'");
  }
  double offset = 0.0;
  auto zone = s.substr(sec_end);
  if (zone == "Z" || zone.empty()) {
  } else if ((zone.front() == '+' || zone.front() == '-') && zone.size() == 6 && zone[3] == ':') {
    int oh = 0, om = 0;
    if (!parse_int(zone.substr(1, 2), oh) || !parse_int(zone.substr(4, 2), om)) {
      throw InputError("unparseable timestamp offset in '" + std::string(s) + "'");
    }
    offset = (zone.front() == '+' ? 1.0 : -1.0) * (oh * 3600.0 + om * 60.0);
  } else {
    throw InputError("unparseable timestamp '" + std::string(s) + "'");
  }

  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec >= 61.0) {
    throw InputError("invalid calendar date-time '" + std::string(s) + "'");
  }
  const auto days_since_epoch = sys_days{ymd}.time_since_epoch().count();
  return static_cast<double>(days_since_epoch) * 86400.0 + h * 3600.0 + mi * 60.0 + sec - offset;
}

const std::vector<double>& RawRecords::channel(std::string_view name) const {
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (names[k] == name) return channels[k];
  }
  throw LookupError("records have no channel '" + std::string(name) + "'");
}

std::vector<double>& RawRecords::channel(std::string_view name) {
  return const_cast<std::vector<double>&>(std::as_const(*this).channel(name));
}

RawRecords parse_csv(std::istream& in, std::string_view time_column,
                     const std::vector<std::string>& channel_columns) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("CSV input is empty");
  const auto header = split_csv_line(line);
  const std::size_t tcol = column_index(header, time_column);
  std::vector<std::size_t> cols;
  for (const auto& name : channel_columns) cols.push_back(column_index(header, name));

  std::vector<double> times;
  std::vector<std::vector<double>> values(cols.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw InputError("expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    try {
      times.push_back(parse_timestamp(fields[tcol]));
    } catch (const InputError& e) {
      throw InputError(e.what(), line_no);
    }
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const auto& field = fields[cols[k]];
      double v = kNaN;
      if (!is_absent(field) && !parse_double(field, v)) {
        throw InputError("column '" + channel_columns[k] + "': unparseable value '" + field + "'",
                         line_no);
      }
      if (!std::isfinite(v)) v = kNaN;
      values[k].push_back(v);
    }
  }

  // Stable sort by time, then merge duplicate timestamps by averaging.
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

  RawRecords rec;
  rec.names = channel_columns;
  rec.channels.resize(cols.size());
  std::vector<double> sum(cols.size());
  std::vector<std::size_t> cnt(cols.size());
  for (std::size_t a = 0; a < order.size();) {
    std::size_t b = a;
    std::fill(sum.begin(), sum.end(), 0.0);
    std::fill(cnt.begin(), cnt.end(), 0);
    while (b < order.size() && times[order[b]] == times[order[a]]) {
      for (std::size_t k = 0; k < cols.size(); ++k) {
        const double v = values[k][order[b]];
        if (!std::isnan(v)) {
          sum[k] += v;
          ++cnt[k];
        }
      }
      ++b;
    }
    rec.timestamps.push_back(times[order[a]]);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      rec.channels[k].push_back(cnt[k] ? sum[k] / static_cast<double>(cnt[k]) : kNaN);
    }
    a = b;
  }
  for (std::size_t i = 1; i < rec.timestamps.size(); ++i) {
    if (!(rec.timestamps[i] > rec.timestamps[i - 1])) {
      throw InputError("timestamps are not strictly increasing after sorting");
    }
  }
  return rec;
}

RawRecords load_csv(const std::filesystem::path& path, std::string_view time_column,
                    const std::vector<std::string>& channel_columns) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return parse_csv(in, time_column, channel_columns);
}

void to_percent_of_rated(RawRecords& records, std::string_view channel, double rated) {
  if (!(rated > 0.0)) throw DomainError("rated power must be positive");
  for (double& v : records.channel(channel)) v = v / rated * 100.0;
}

const SampledSeries& AlignedSeries::channel(std::string_view name) const {
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (names[k] == name) return channels[k];
  }
  throw LookupError("aligned series has no channel '" + std::string(name) + "'");
}

bool AlignedSeries::has_channel(std::string_view name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

SampledSeries AlignedSeries::time_channel() const {
  return kmlocal::time_channel(size(), window);
}

AlignedSeries aggregate(const RawRecords& records, double window) {
  if (!(window > 0.0) || !std::isfinite(window)) throw DomainError("window must be positive");
  if (records.size() == 0) throw DomainError("no records to aggregate");

  AlignedSeries out;
  out.window = window;
  out.start = std::floor(records.timestamps.front() / window) * window;
  // Relative slack so that timestamps written as k * window land in window k
  // despite decimal round-off.
  constexpr double kSlack = 1e-9;
  const auto slot = [&](double t) {
    return static_cast<std::size_t>(std::floor((t - out.start) / window + kSlack));
  };
  const std::size_t n = slot(records.timestamps.back()) + 1;

  out.names = records.names;
  for (const auto& values : records.channels) {
    std::vector<double> sum(n, 0.0);
    std::vector<std::size_t> cnt(n, 0);
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (std::isnan(values[i])) continue;
      const std::size_t k = slot(records.timestamps[i]);
      sum[k] += values[i];
      ++cnt[k];
    }
    std::vector<bool> missing(n);
    for (std::size_t k = 0; k < n; ++k) {
      missing[k] = cnt[k] == 0;
      sum[k] = missing[k] ? kNaN : sum[k] / static_cast<double>(cnt[k]);
    }
    out.channels.emplace_back(std::move(sum), std::move(missing), window);
  }
  return out;
}

AlignedSeries aligned_view(const AlignedSeries& series, const std::vector<std::string>& names) {
  AlignedSeries out;
  out.start = series.start;
  out.window = series.window;
  out.names = names;
  std::vector<bool> missing(series.size(), false);
  for (const auto& name : names) {
    const auto& ch = series.channel(name);
    for (std::size_t i = 0; i < missing.size(); ++i) {
      if (ch.missing[i]) missing[i] = true;
    }
  }
  for (const auto& name : names) {
    auto values = series.channel(name).values;
    out.channels.emplace_back(std::move(values), missing, series.window);
  }
  return out;
}

}  // namespace kmlocal
