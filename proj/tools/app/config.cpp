#include "app/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>

#include <nlohmann/json.hpp>

#include "kmlocal/error.hpp"

namespace kmlocal::app {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

// A JSON value together with its field path, for error messages.
class Node {
 public:
  Node(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return value_; }

  std::string child_path(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  void object(std::initializer_list<std::string_view> allowed) const {
    if (!value_.is_object()) fail("expected an object");
    for (const auto& [key, _] : value_.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        throw ConfigError(child_path(key), "unknown field");
      }
    }
  }

  bool has(std::string_view key) const {
    return value_.contains(std::string(key)) && !value_.at(std::string(key)).is_null();
  }

  Node at(std::string_view key) const {
    if (!has(key)) throw ConfigError(child_path(key), "missing required field");
    return {value_.at(std::string(key)), child_path(key)};
  }

  std::vector<Node> elements() const {
    if (!value_.is_array()) fail("expected an array");
    std::vector<Node> out;
    for (std::size_t i = 0; i < value_.size(); ++i) {
      out.emplace_back(value_[i], path_ + "[" + std::to_string(i) + "]");
    }
    return out;
  }

  double number() const {
    if (!value_.is_number()) fail("expected a number");
    return value_.get<double>();
  }

  std::uint64_t unsigned_integer() const {
    if (value_.is_number_unsigned()) return value_.get<std::uint64_t>();
    if (value_.is_number_integer()) {
      if (value_.get<std::int64_t>() < 0) fail("expected a non-negative integer");
      return static_cast<std::uint64_t>(value_.get<std::int64_t>());
    }
    fail("expected an integer");
  }

  int integer() const {
    if (!value_.is_number_integer()) fail("expected an integer");
    return value_.get<int>();
  }

  std::string string() const {
    if (!value_.is_string()) fail("expected a string");
    return value_.get<std::string>();
  }

  std::vector<double> numbers() const {
    std::vector<double> out;
    for (const auto& e : elements()) out.push_back(e.number());
    return out;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(path_, what); }

 private:
  const json& value_;
  std::string path_;
};

// Exactly one of `keys` present in an object node.
std::string one_of(const Node& node, std::initializer_list<std::string_view> keys) {
  std::vector<std::string> present;
  for (auto k : keys) {
    if (node.has(k)) present.emplace_back(k);
  }
  if (present.size() != 1) {
    std::vector<std::string> names(keys.begin(), keys.end());
    node.fail("expected exactly one of " + join(names));
  }
  return present.front();
}

int parse_basis(const Node& node) {
  const auto text = node.string();
  constexpr std::string_view prefix = "polynomial(";
  if (text.size() > prefix.size() + 1 && text.compare(0, prefix.size(), prefix) == 0 &&
      text.back() == ')') {
    int degree = -1;
    const char* first = text.data() + prefix.size();
    const char* last = text.data() + text.size() - 1;
    const auto res = std::from_chars(first, last, degree);
    if (res.ec == std::errc{} && res.ptr == last) return degree;
  }
  node.fail("expected \"polynomial(K)\"");
}

Source parse_source(const Node& node) {
  node.object({"simulate", "csv", "scada_demo"});
  const auto kind = one_of(node, {"simulate", "csv", "scada_demo"});
  const Node body = node.at(kind);
  if (kind == "simulate") {
    body.object({"process", "custom", "n", "dt", "x0"});
    SimulateSource s;
    if (one_of(body, {"process", "custom"}) == "process") {
      s.process = body.at("process").string();
    } else {
      const Node c = body.at("custom");
      c.object({"drift", "diffusion"});
      s.custom = CustomProcess{c.at("drift").numbers(), c.at("diffusion").numbers()};
    }
    if (body.has("n")) s.n = body.at("n").unsigned_integer();
    if (body.has("dt")) s.dt = body.at("dt").number();
    if (body.has("x0")) s.x0 = body.at("x0").numbers();
    return s;
  }
  if (kind == "csv") {
    body.object({"path", "time_column", "channels", "window", "rated_power"});
    CsvSource s;
    s.path = body.at("path").string();
    if (body.has("time_column")) s.time_column = body.at("time_column").string();
    for (const auto& e : body.at("channels").elements()) s.channels.push_back(e.string());
    if (body.has("window")) s.window = body.at("window").number();
    if (body.has("rated_power")) {
      const Node r = body.at("rated_power");
      r.object({"channel", "rated"});
      s.rated_power = RatedPower{r.at("channel").string(), r.at("rated").number()};
    }
    return s;
  }
  body.object({"days", "regulation_day", "window", "rated_power"});
  ScadaDemoSource s;
  if (body.has("days")) s.days = body.at("days").number();
  if (body.has("regulation_day")) s.regulation_day = body.at("regulation_day").number();
  if (body.has("window")) s.window = body.at("window").number();
  if (body.has("rated_power")) s.rated_power = body.at("rated_power").number();
  return s;
}

GridConfig parse_grid(const Node& node) {
  node.object({"auto", "points", "axes"});
  GridConfig g;
  const auto kind = one_of(node, {"auto", "points", "axes"});
  if (kind == "auto") {
    g.mode = GridConfig::Mode::Auto;
    const Node a = node.at("auto");
    a.object({"count", "lower", "upper"});
    if (a.has("count")) g.count = a.at("count").unsigned_integer();
    if (a.has("lower")) g.lower = a.at("lower").number();
    if (a.has("upper")) g.upper = a.at("upper").number();
  } else if (kind == "points") {
    g.mode = GridConfig::Mode::Points;
    for (const auto& e : node.at("points").elements()) g.points.push_back(e.numbers());
  } else {
    g.mode = GridConfig::Mode::Axes;
    for (const auto& e : node.at("axes").elements()) g.axes.push_back(e.numbers());
  }
  return g;
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

json source_json(const Source& source) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SimulateSource>) {
          json body = {{"n", s.n}, {"dt", s.dt}};
          if (s.custom) {
            body["custom"] = {{"drift", s.custom->drift}, {"diffusion", s.custom->diffusion}};
          } else {
            body["process"] = s.process;
          }
          if (s.x0) body["x0"] = *s.x0;
          return {{"simulate", body}};
        } else if constexpr (std::is_same_v<T, CsvSource>) {
          json body = {{"path", s.path},
                       {"time_column", s.time_column},
                       {"channels", s.channels},
                       {"window", s.window}};
          if (s.rated_power) {
            body["rated_power"] = {{"channel", s.rated_power->channel},
                                   {"rated", s.rated_power->rated}};
          }
          return {{"csv", body}};
        } else {
          json body = {{"days", s.days}, {"window", s.window}, {"rated_power", s.rated_power}};
          body["regulation_day"] = s.regulation_day ? json(*s.regulation_day) : json(nullptr);
          return {{"scada_demo", body}};
        }
      },
      source);
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::Np:
      return "np";
    case Method::Global:
      return "global";
    case Method::Local:
      return "local";
  }
  return "local";
}

Method parse_method(std::string_view name) {
  if (name == "np") return Method::Np;
  if (name == "global") return Method::Global;
  if (name == "local") return Method::Local;
  throw ConfigError("method", "unknown method '" + std::string(name) +
                                  "' (valid: np, global, local)");
}

std::vector<std::string> RunConfig::condition_names() const {
  std::vector<std::string> out;
  for (const auto& c : conditions) out.push_back(c.channel);
  return out;
}

KernelSpec RunConfig::kernel() const {
  std::vector<KernelFamily> families;
  std::vector<double> bandwidths;
  for (const auto& c : conditions) {
    families.push_back(c.kernel);
    bandwidths.push_back(c.bandwidth);
  }
  return KernelSpec(std::move(families), std::move(bandwidths));
}

std::vector<std::string> source_channels(const Source& source) {
  std::vector<std::string> out = std::visit(
      [](const auto& s) -> std::vector<std::string> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SimulateSource>) {
          if (s.custom || s.process.empty()) return {"x"};
          try {
            return builtin_process(s.process).channel_names;
          } catch (const LookupError&) {
            return {};
          }
        } else if constexpr (std::is_same_v<T, CsvSource>) {
          return s.channels;
        } else {
          return {"wind_speed", "power"};
        }
      },
      source);
  out.emplace_back("t");
  return out;
}

void validate(const RunConfig& c) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SimulateSource>) {
          const std::string p = "source.simulate";
          std::size_t dimension = 1;
          if (s.custom) {
            if (s.custom->drift.empty()) throw ConfigError(p + ".custom.drift", "must not be empty");
            if (s.custom->diffusion.empty()) {
              throw ConfigError(p + ".custom.diffusion", "must not be empty");
            }
          } else {
            try {
              dimension = builtin_process(s.process).dimension();
            } catch (const LookupError& e) {
              throw ConfigError(p + ".process", e.what());
            }
          }
          if (s.n < 2) throw ConfigError(p + ".n", "must be at least 2");
          if (!positive_finite(s.dt)) throw ConfigError(p + ".dt", "must be positive");
          if (s.x0 && s.x0->size() != dimension) {
            throw ConfigError(p + ".x0", "expected " + std::to_string(dimension) + " values");
          }
        } else if constexpr (std::is_same_v<T, CsvSource>) {
          const std::string p = "source.csv";
          if (s.path.empty()) throw ConfigError(p + ".path", "must not be empty");
          if (s.time_column.empty()) throw ConfigError(p + ".time_column", "must not be empty");
          if (s.channels.empty()) throw ConfigError(p + ".channels", "must not be empty");
          if (std::find(s.channels.begin(), s.channels.end(), "t") != s.channels.end()) {
            throw ConfigError(p + ".channels", "'t' is reserved for the time channel");
          }
          if (!positive_finite(s.window)) throw ConfigError(p + ".window", "must be positive");
          if (s.rated_power) {
            if (std::find(s.channels.begin(), s.channels.end(), s.rated_power->channel) ==
                s.channels.end()) {
              throw ConfigError(p + ".rated_power.channel",
                                "'" + s.rated_power->channel + "' is not a listed channel");
            }
            if (!positive_finite(s.rated_power->rated)) {
              throw ConfigError(p + ".rated_power.rated", "must be positive");
            }
          }
        } else {
          const std::string p = "source.scada_demo";
          if (!positive_finite(s.days)) throw ConfigError(p + ".days", "must be positive");
          if (!positive_finite(s.window)) throw ConfigError(p + ".window", "must be positive");
          if (!positive_finite(s.rated_power)) {
            throw ConfigError(p + ".rated_power", "must be positive");
          }
          if (s.regulation_day && !std::isfinite(*s.regulation_day)) {
            throw ConfigError(p + ".regulation_day", "must be finite");
          }
        }
      },
      c.source);

  const auto channels = source_channels(c.source);
  const auto require_channel = [&](const std::string& path, const std::string& name) {
    if (std::find(channels.begin(), channels.end(), name) == channels.end()) {
      throw ConfigError(path, "channel '" + name + "' not in source (available: " +
                                  join(channels) + ")");
    }
  };
  if (c.target.empty()) throw ConfigError("target", "missing required field");
  require_channel("target", c.target);
  if (!c.dependency.empty()) require_channel("dependency", c.dependency);

  if (c.method != Method::Global && c.conditions.empty()) {
    throw ConfigError("conditions", "at least one condition is required for method " +
                                        std::string(to_string(c.method)));
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < c.conditions.size(); ++i) {
    const std::string p = "conditions[" + std::to_string(i) + "]";
    require_channel(p + ".channel", c.conditions[i].channel);
    if (!seen.insert(c.conditions[i].channel).second) {
      throw ConfigError(p + ".channel", "duplicate condition channel");
    }
    if (!positive_finite(c.conditions[i].bandwidth)) {
      throw ConfigError(p + ".bandwidth", "must be positive");
    }
  }

  if (c.basis_degree < 0 || c.basis_degree > 8) {
    throw ConfigError("basis", "polynomial degree must be between 0 and 8");
  }

  const std::size_t dim = c.conditions.size();
  switch (c.grid.mode) {
    case GridConfig::Mode::Auto:
      if (c.grid.count == 0) throw ConfigError("grid.auto.count", "must be at least 1");
      if (!(c.grid.lower >= 0.0 && c.grid.lower < c.grid.upper && c.grid.upper <= 100.0)) {
        throw ConfigError("grid.auto", "need 0 <= lower < upper <= 100");
      }
      break;
    case GridConfig::Mode::Points:
      if (c.grid.points.empty()) throw ConfigError("grid.points", "must not be empty");
      for (std::size_t k = 0; k < c.grid.points.size(); ++k) {
        if (c.grid.points[k].size() != dim) {
          throw ConfigError("grid.points[" + std::to_string(k) + "]",
                            "expected " + std::to_string(dim) + " coordinates");
        }
      }
      break;
    case GridConfig::Mode::Axes:
      if (c.grid.axes.size() != dim) {
        throw ConfigError("grid.axes", "expected one axis per condition (" +
                                           std::to_string(dim) + ")");
      }
      for (std::size_t d = 0; d < dim; ++d) {
        const auto& axis = c.grid.axes[d];
        if (axis.empty() || !std::is_sorted(axis.begin(), axis.end(), std::less_equal<>())) {
          throw ConfigError("grid.axes[" + std::to_string(d) + "]",
                            "must be non-empty and strictly increasing");
        }
      }
      break;
  }

  if (c.orders.empty()) throw ConfigError("orders", "must not be empty");
  for (std::size_t i = 0; i < c.orders.size(); ++i) {
    if (c.orders[i] != 1 && c.orders[i] != 2) {
      throw ConfigError("orders[" + std::to_string(i) + "]", "order must be 1 or 2");
    }
  }
  if (c.lags.empty()) throw ConfigError("lags", "must not be empty");
  for (std::size_t i = 0; i < c.lags.size(); ++i) {
    if (c.lags[i] < 1 || (i > 0 && c.lags[i] <= c.lags[i - 1])) {
      throw ConfigError("lags[" + std::to_string(i) + "]",
                        "lags must be positive and strictly increasing");
    }
  }
  if (!(c.min_effective_count >= 0.0)) {
    throw ConfigError("min_effective_count", "must be non-negative");
  }
  if (!(c.max_condition >= 1.0)) throw ConfigError("max_condition", "must be at least 1");
  if (c.out.empty()) throw ConfigError("out", "must not be empty");
  if (c.metrics.x_count == 0) throw ConfigError("metrics.x_count", "must be at least 1");
  if (!(c.metrics.x_min <= c.metrics.x_max)) {
    throw ConfigError("metrics", "need x_min <= x_max");
  }
  if (!c.metrics.truth.empty()) {
    const auto& names = builtin_process_names();
    if (std::find(names.begin(), names.end(), c.metrics.truth) == names.end()) {
      throw ConfigError("metrics.truth",
                        "unknown truth '" + c.metrics.truth + "' (valid: " + join(names) + ")");
    }
  }
}

std::vector<std::string> config_warnings(const RunConfig& c) {
  std::vector<std::string> out;
  if (c.method == Method::Global) return out;
  const auto& dep = c.dependency_channel();
  for (const auto& cond : c.conditions) {
    if (cond.channel == dep) {
      out.push_back("dependency channel '" + dep + "' is also a condition channel");
    }
  }
  return out;
}

RunConfig parse_config(const json& doc) {
  const Node root(doc, "");
  root.object({"source", "target", "dependency", "conditions", "basis", "grid", "orders", "lags",
               "method", "min_effective_count", "max_condition", "seed", "out", "metrics"});
  RunConfig c;
  c.source = parse_source(root.at("source"));
  c.target = root.at("target").string();
  if (root.has("dependency")) c.dependency = root.at("dependency").string();
  if (root.has("conditions")) {
    for (const auto& e : root.at("conditions").elements()) {
      e.object({"channel", "kernel", "bandwidth"});
      ConditionConfig cc;
      cc.channel = e.at("channel").string();
      const Node k = e.at("kernel");
      try {
        cc.kernel = parse_kernel_family(k.string());
      } catch (const LookupError& err) {
        k.fail(err.what());
      }
      cc.bandwidth = e.at("bandwidth").number();
      c.conditions.push_back(std::move(cc));
    }
  }
  if (root.has("basis")) c.basis_degree = parse_basis(root.at("basis"));
  if (root.has("grid")) c.grid = parse_grid(root.at("grid"));
  if (root.has("orders")) {
    c.orders.clear();
    for (const auto& e : root.at("orders").elements()) c.orders.push_back(e.integer());
  }
  if (root.has("lags")) {
    c.lags.clear();
    for (const auto& e : root.at("lags").elements()) c.lags.push_back(e.unsigned_integer());
  }
  if (root.has("method")) {
    const Node m = root.at("method");
    try {
      c.method = parse_method(m.string());
    } catch (const ConfigError& err) {
      m.fail(std::string(err.what()).substr(std::string("method: ").size()));
    }
  }
  if (root.has("min_effective_count")) {
    c.min_effective_count = root.at("min_effective_count").number();
  }
  if (root.has("max_condition")) c.max_condition = root.at("max_condition").number();
  if (root.has("seed")) c.seed = root.at("seed").unsigned_integer();
  if (root.has("out")) c.out = root.at("out").string();
  if (root.has("metrics")) {
    const Node m = root.at("metrics");
    m.object({"truth", "x_min", "x_max", "x_count"});
    if (m.has("truth")) c.metrics.truth = m.at("truth").string();
    if (m.has("x_min")) c.metrics.x_min = m.at("x_min").number();
    if (m.has("x_max")) c.metrics.x_max = m.at("x_max").number();
    if (m.has("x_count")) c.metrics.x_count = m.at("x_count").unsigned_integer();
  }
  validate(c);
  return c;
}

json to_json(const RunConfig& c) {
  json doc;
  doc["source"] = source_json(c.source);
  doc["target"] = c.target;
  if (!c.dependency.empty()) doc["dependency"] = c.dependency;
  doc["conditions"] = json::array();
  for (const auto& cond : c.conditions) {
    doc["conditions"].push_back({{"channel", cond.channel},
                                 {"kernel", std::string(to_string(cond.kernel))},
                                 {"bandwidth", cond.bandwidth}});
  }
  doc["basis"] = "polynomial(" + std::to_string(c.basis_degree) + ")";
  switch (c.grid.mode) {
    case GridConfig::Mode::Auto:
      doc["grid"] = {{"auto", {{"count", c.grid.count}, {"lower", c.grid.lower},
                               {"upper", c.grid.upper}}}};
      break;
    case GridConfig::Mode::Points:
      doc["grid"] = {{"points", c.grid.points}};
      break;
    case GridConfig::Mode::Axes:
      doc["grid"] = {{"axes", c.grid.axes}};
      break;
  }
  doc["orders"] = c.orders;
  doc["lags"] = c.lags;
  doc["method"] = std::string(to_string(c.method));
  doc["min_effective_count"] = c.min_effective_count;
  doc["max_condition"] = c.max_condition;
  doc["seed"] = c.seed;
  doc["out"] = c.out;
  json metrics = {{"x_min", c.metrics.x_min},
                  {"x_max", c.metrics.x_max},
                  {"x_count", c.metrics.x_count}};
  if (!c.metrics.truth.empty()) metrics["truth"] = c.metrics.truth;
  doc["metrics"] = metrics;
  return doc;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"ou", "piecewise", "coupled2d", "nonstationary2d",
                                              "powercurve-demo"};
  return names;
}

RunConfig preset(std::string_view name) {
  RunConfig c;
  c.out = "out/" + std::string(name);
  c.basis_degree = 1;
  c.grid = GridConfig{};
  c.method = Method::Local;
  if (name == "ou" || name == "piecewise") {
    SimulateSource s;
    s.process = std::string(name);
    c.source = s;
    c.target = "x";
    c.conditions = {{"x", KernelFamily::Gaussian, 0.25}};
    c.metrics.truth = std::string(name);
    return c;
  }
  if (name == "coupled2d") {
    SimulateSource s;
    s.process = "coupled2d";
    c.source = s;
    c.target = "x";
    c.conditions = {{"y", KernelFamily::Gaussian, 0.5}};
    c.orders = {1};
    c.metrics.truth = "coupled2d";
    return c;
  }
  if (name == "nonstationary2d") {
    SimulateSource s;
    s.process = "nonstationary2d";
    c.source = s;
    c.target = "x";
    c.conditions = {{"y", KernelFamily::Gaussian, 0.5}, {"t", KernelFamily::Gaussian, 200.0}};
    c.orders = {1};
    c.metrics.truth = "nonstationary2d";
    return c;
  }
  if (name == "powercurve-demo") {
    ScadaDemoSource s;
    s.regulation_day = 182.5;
    c.source = s;
    c.target = "power";
    c.conditions = {{"t", KernelFamily::Rectangular, 7.0 * 86400.0},
                    {"wind_speed", KernelFamily::Epanechnikov, 0.5}};
    c.orders = {1};
    return c;
  }
  throw ConfigError("preset", "unknown preset '" + std::string(name) + "' (valid: " +
                                  join(preset_names()) + ")");
}

RunConfig merge_config(const RunConfig& base, const json& patch) {
  if (!patch.is_object()) throw ConfigError("", "config must be a JSON object");
  json doc = to_json(base);
  json rest = patch;
  for (const char* key : {"source", "grid"}) {
    if (rest.contains(key)) {
      doc[key] = rest[key];
      rest.erase(key);
    }
  }
  doc.merge_patch(rest);
  return parse_config(doc);
}

RunConfig resolve_config(const std::optional<std::string>& preset_name,
                         const std::optional<std::string>& config_path) {
  if (!config_path) {
    if (!preset_name) throw ConfigError("", "either a preset or a config file is required");
    auto c = preset(*preset_name);
    validate(c);
    return c;
  }
  std::ifstream in(*config_path);
  if (!in) throw ConfigError("", "cannot open config file '" + *config_path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", "invalid JSON in '" + *config_path + "': " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
  std::optional<std::string> base = preset_name;
  if (doc.contains("preset")) {
    const Node p(doc.at("preset"), "preset");
    if (!base) base = p.string();
    doc.erase("preset");
  }
  if (base) return merge_config(preset(*base), doc);
  return parse_config(doc);
}

}  // namespace kmlocal::app
