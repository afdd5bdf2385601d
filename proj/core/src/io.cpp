#include "kmlocal/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

#include "kmlocal/error.hpp"

namespace kmlocal {

std::string format_number(double value) {
  if (std::isnan(value)) return {};
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return {buf, res.ptr};
}

void write_series_csv(std::ostream& out, std::span<const std::string> names,
                      std::span<const SampledSeries> channels, double t0) {
  if (names.size() != channels.size()) throw ShapeError("one name per channel is required");
  if (channels.empty()) throw ShapeError("nothing to write");
  const std::size_t n = channels.front().size();
  const double dt = channels.front().dt;
  out << "index,t";
  for (const auto& name : names) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    out << i << ',' << format_number(t0 + static_cast<double>(i) * dt);
    for (const auto& ch : channels) {
      out << ',';
      if (!ch.missing[i]) out << format_number(ch.values[i]);
    }
    out << '\n';
  }
}

void write_coefficients_csv(std::ostream& out, std::span<const std::string> condition_names,
                            std::span<const LocalCoefficients> rows, std::string_view lag_label) {
  const std::size_t nf = rows.empty() ? 0 : rows.front().phi.size();
  out << "order,lag";
  for (const auto& name : condition_names) out << ',' << name;
  for (std::size_t j = 0; j < nf; ++j) out << ",phi_" << j;
  for (std::size_t j = 0; j < nf; ++j) out << ",Phi_" << j;
  out << ",effective_count,gram_condition,valid,reason\n";
  for (const auto& r : rows) {
    out << r.order << ',' << lag_label;
    for (std::size_t d = 0; d < condition_names.size(); ++d) {
      out << ',';
      if (d < r.grid_point.size()) out << format_number(r.grid_point[d]);
    }
    for (double v : r.phi) out << ',' << format_number(v);
    for (double v : r.Phi) out << ',' << format_number(v);
    out << ',' << format_number(r.effective_count) << ',' << format_number(r.gram_condition)
        << ',' << (r.valid ? 1 : 0) << ',' << to_string(r.reason) << '\n';
  }
}

void write_heatmap_csv(std::ostream& out, std::span<const std::string> condition_names,
                       std::span<const DriftLine> lines) {
  for (const auto& name : condition_names) out << name << ',';
  out << "fixed_point,Phi1,stable,valid\n";
  for (const auto& l : lines) {
    for (std::size_t d = 0; d < condition_names.size(); ++d) {
      out << (d < l.grid_point.size() ? format_number(l.grid_point[d]) : std::string{}) << ',';
    }
    out << (l.fixed_point ? format_number(*l.fixed_point) : std::string{}) << ','
        << (l.valid ? format_number(l.Phi1) : std::string{}) << ',' << (l.stable ? 1 : 0) << ','
        << (l.valid ? 1 : 0) << '\n';
  }
}

void write_file(const std::filesystem::path& path,
                const std::function<void(std::ostream&)>& body) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
  body(out);
  out.flush();
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

}  // namespace kmlocal
