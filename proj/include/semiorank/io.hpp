#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "semiorank/errors.hpp"
#include "semiorank/version.hpp"

namespace semiorank {

/// One catalog row: a sign's label and its cardinality (price/value).
/// Duplicate labels are allowed; each copy counts as a sign.
struct CatalogRecord {
  std::string label;
  double cardinality;
};

struct IngestReport {
  std::vector<CatalogRecord> records;
  std::vector<std::pair<std::int64_t, std::string>> rejected; // (line, reason)
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size();
}

} // namespace detail

/// Parse a catalog CSV: either `label,price` with that exact header or
/// two-column headerless. Rows with non-positive or non-numeric price are
/// collected with their line numbers; zero valid rows is an error.
inline IngestReport ingest_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read catalog file: " + path);

  IngestReport report;
  std::string line;
  std::int64_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    if (first) {
      first = false;
      if (detail::trim(line) == "label,price") continue; // header
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      report.rejected.emplace_back(line_no, "expected two comma-separated fields");
      continue;
    }
    const std::string label = detail::trim(line.substr(0, comma));
    double price = 0.0;
    if (label.empty()) {
      report.rejected.emplace_back(line_no, "empty label");
      continue;
    }
    if (!detail::parse_double(line.substr(comma + 1), price)) {
      report.rejected.emplace_back(line_no, "non-numeric price");
      continue;
    }
    if (!(price > 0.0) || !std::isfinite(price)) {
      report.rejected.emplace_back(line_no, "non-positive price");
      continue;
    }
    report.records.push_back({label, price});
  }
  if (report.records.empty())
    throw DataError("catalog contains no valid rows: " + path);
  return report;
}

/// Parse a spectrum file: either a JSON array of numbers or one value per line.
inline std::vector<double> read_spectrum_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read spectrum file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();

  std::vector<double> values;
  const std::string trimmed = detail::trim(content);
  if (!trimmed.empty() && trimmed.front() == '[') {
    const auto parsed = nlohmann::json::parse(trimmed, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_array())
      throw DataError("spectrum file is not a valid JSON array: " + path);
    for (const auto& v : parsed) {
      if (!v.is_number()) throw DataError("spectrum array contains a non-number: " + path);
      values.push_back(v.get<double>());
    }
  } else {
    std::istringstream lines(content);
    std::string line;
    std::int64_t line_no = 0;
    while (std::getline(lines, line)) {
      ++line_no;
      const std::string t = detail::trim(line);
      if (t.empty()) continue;
      double v = 0.0;
      if (!detail::parse_double(t, v))
        throw DataError("spectrum line " + std::to_string(line_no) + " is not a number: " + path);
      values.push_back(v);
    }
  }
  if (values.empty()) throw DataError("spectrum file is empty: " + path);
  return values;
}

/// Lossless double formatting for machine outputs: 17 significant digits.
inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// FNV-1a 64-bit content digest, hex-encoded. Not cryptographic; identifies
/// inputs in run manifests.
inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read file for digest: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return fnv1a_hex(buffer.str());
}

/// Reproducibility record serialized alongside every output file: identical
/// manifest plus inputs implies identical outputs. No timestamps by design.
struct RunManifest {
  std::string subcommand;
  nlohmann::json parameters = nlohmann::json::object();
  nlohmann::json inputs = nlohmann::json::object(); // path -> digest
  std::vector<std::string> outputs;

  nlohmann::json to_json() const {
    return nlohmann::json{{"schema_version", schema_version},
                          {"tool_version", version},
                          {"subcommand", subcommand},
                          {"parameters", parameters},
                          {"inputs", inputs},
                          {"outputs", outputs}};
  }
};

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << content;
  if (!out) throw DataError("write failed: " + path);
}

inline void write_manifest_beside(const std::string& output_path, const RunManifest& manifest) {
  write_text_file(output_path + ".manifest.json", manifest.to_json().dump(2) + "\n");
}

/// Minimal static SVG polyline chart of one or two series sharing an x grid.
inline std::string svg_line_chart(const std::vector<double>& xs,
                                  const std::vector<std::vector<double>>& series,
                                  int width = 640, int height = 400) {
  if (xs.empty() || series.empty()) throw DataError("svg_line_chart: empty data");
  double x_lo = xs.front(), x_hi = xs.front(), y_lo = 0, y_hi = 0;
  bool first_y = true;
  for (double x : xs) {
    x_lo = std::min(x_lo, x);
    x_hi = std::max(x_hi, x);
  }
  for (const auto& s : series)
    for (double y : s) {
      if (first_y) {
        y_lo = y_hi = y;
        first_y = false;
      }
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  const double x_span = x_hi > x_lo ? x_hi - x_lo : 1.0;
  const double y_span = y_hi > y_lo ? y_hi - y_lo : 1.0;
  const int margin = 40;
  const double plot_w = width - 2 * margin, plot_h = height - 2 * margin;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c"};
  for (std::size_t si = 0; si < series.size(); ++si) {
    svg << "<polyline fill=\"none\" stroke=\"" << colors[si % 3] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < xs.size() && i < series[si].size(); ++i) {
      const double px = margin + (xs[i] - x_lo) / x_span * plot_w;
      const double py = height - margin - (series[si][i] - y_lo) / y_span * plot_h;
      svg << px << "," << py << (i + 1 < xs.size() ? " " : "");
    }
    svg << "\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

} // namespace semiorank
