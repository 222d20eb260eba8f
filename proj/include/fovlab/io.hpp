#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fovlab/error.hpp"
#include "fovlab/fov.hpp"
#include "fovlab/matrix.hpp"

namespace fovlab {

using json = nlohmann::ordered_json;

/// 17 significant digits, so every double round-trips.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline void dump_json(const json& j, std::string& out, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        out += json(it.key()).dump();
        out += ": ";
        dump_json(it.value(), out, indent, depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& v : j)
        if (v.is_structured()) flat = false;
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          dump_json(j[i], out, indent, depth + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        dump_json(j[i], out, indent, depth + 1);
      }
      out += "\n" + close + "]";
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      std::string s = format_double(v);
      if (s.find_first_of(".eE") == std::string::npos) s += ".0";
      out += s;
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace detail

/// JSON text with every float at 17 significant digits; non-finite floats
/// become null.
inline std::string to_json_text(const json& j) {
  std::string out;
  detail::dump_json(j, out, 2, 0);
  out += "\n";
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw ValidationError("write to '" + path.string() + "' failed");
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open '" + path.string() + "': no such file or not readable");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

/// Minimal CSV builder; numbers are written with format_double.
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) : columns_(header.size()) {
    row_strings(header);
  }

  CsvWriter& row(const std::vector<double>& values) {
    require(values.size() == columns_, "csv row width mismatch");
    std::vector<std::string> s;
    s.reserve(values.size());
    for (double v : values) s.push_back(format_double(v));
    row_strings(s);
    return *this;
  }

  CsvWriter& row_strings(const std::vector<std::string>& cells) {
    require(cells.size() == columns_, "csv row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += cells[i];
    }
    text_ += '\n';
    return *this;
  }

  const std::string& str() const noexcept { return text_; }

 private:
  std::size_t columns_;
  std::string text_;
};

inline json matrix_to_json(const ComplexMatrix& b) {
  json e = json::array();
  for (const auto& z : b.entries()) e.push_back(json::array({z.real(), z.imag()}));
  return json{{"n", b.n()}, {"entries", std::move(e)}};
}

/// Parses {"n": int, "entries": [[re, im], ...]}; errors name the first bad entry.
inline ComplexMatrix matrix_from_json(const json& j) {
  require(j.is_object(), "matrix JSON must be an object");
  require(j.contains("n") && j["n"].is_number_integer(), "matrix JSON needs integer field 'n'");
  const auto n = j["n"].get<long long>();
  require(n >= 1, "matrix JSON 'n' must be positive");
  require(j.contains("entries") && j["entries"].is_array(), "matrix JSON needs array field 'entries'");
  const auto& e = j["entries"];
  const std::size_t nn = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  std::vector<cplx> d;
  d.reserve(e.size());
  for (std::size_t k = 0; k < e.size(); ++k) {
    const auto& v = e[k];
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw ValidationError("matrix JSON entry " + std::to_string(k) +
                            " is not a [re, im] pair of numbers");
    d.emplace_back(v[0].get<double>(), v[1].get<double>());
    if (!std::isfinite(d.back().real()) || !std::isfinite(d.back().imag()))
      throw ValidationError("matrix JSON entry " + std::to_string(k) + " is not finite");
  }
  if (d.size() != nn)
    throw ValidationError("matrix JSON has " + std::to_string(d.size()) + " entries, expected n^2 = " +
                          std::to_string(nn) + " (first bad index " +
                          std::to_string(std::min(d.size(), nn)) + ")");
  return {static_cast<std::size_t>(n), std::move(d)};
}

inline ComplexMatrix read_matrix(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed JSON in '" + path.string() + "' at byte " +
                          std::to_string(e.byte) + ": " + e.what());
  }
  return matrix_from_json(j);
}

inline void write_matrix(const std::filesystem::path& path, const ComplexMatrix& b) {
  write_text(path, to_json_text(matrix_to_json(b)));
}

inline std::string boundary_csv(const RangeBoundary& rb) {
  CsvWriter w({"theta", "h", "re_z", "im_z"});
  for (const auto& s : rb.samples) w.row({s.theta, s.h, s.z.real(), s.z.imag()});
  return w.str();
}

inline json boundary_summary(const RangeBoundary& rb) {
  return json{{"r_plus", json::array({rb.inner_r_plus, rb.outer_r_plus})},
              {"r_minus", rb.r_minus_value},
              {"min_h", json::array({rb.min_h_lower, rb.min_h_upper})},
              {"samples", rb.samples.size()},
              {"tol", rb.tol},
              {"lipschitz_bound", rb.lipschitz_bound},
              {"certified", rb.certified}};
}

}  // namespace fovlab
