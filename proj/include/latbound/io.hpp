#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "latbound/errors.hpp"
#include "latbound/lattice.hpp"

namespace latbound {

using Json = nlohmann::json;

inline constexpr int kReportDigits = 12;

/// x rounded to 12 significant digits (as the nearest double).
inline double round_sig(double x) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", kReportDigits, x);
  return std::strtod(buf, nullptr);
}

inline std::string format_sig(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", kReportDigits, x);
  return buf;
}

/// Every floating-point leaf rounded to 12 significant digits; non-finite values become strings.
inline Json round_numbers(const Json& j) {
  if (j.is_number_float()) {
    const double x = j.get<double>();
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return round_sig(x);
  }
  if (j.is_array() || j.is_object()) {
    Json out = j;
    for (auto it = out.begin(); it != out.end(); ++it) *it = round_numbers(*it);
    return out;
  }
  return j;
}

namespace detail {

inline int line_of_offset(const std::string& text, std::size_t offset) {
  int line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

/// Line of the first occurrence of "key", or 0 when absent.
inline int line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find('"' + key + '"');
  return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path, "file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

/// Parses a JSON document, turning syntax errors into ParseError with the line number.
inline Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    const int line = detail::line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ParseError(source + ": line " + std::to_string(line) + ": malformed document", "document", line);
  }
}

struct LatticeRecord {
  std::string id;
  Matrix basis;
};

/// Reads {"dim": n, "basis": [[...], ...], "id": optional}; rows are basis vectors.
inline LatticeRecord parse_lattice_json(const std::string& text, const std::string& source = "lattice") {
  const Json j = parse_json_text(text, source);
  auto fail = [&](const std::string& field, const std::string& msg) -> ParseError {
    const std::string key = field.substr(0, field.find('['));
    const int line = detail::line_of_key(text, key);
    return ParseError(source + (line ? ": line " + std::to_string(line) : std::string()) + ": field '" + field +
                          "': " + msg,
                      field, line);
  };
  if (!j.is_object()) throw ParseError(source + ": expected an object", "document", 1);
  if (!j.contains("dim")) throw fail("dim", "missing");
  if (!j.at("dim").is_number_integer() || j.at("dim").get<long long>() < 1)
    throw fail("dim", "must be a positive integer");
  const int n = j.at("dim").get<int>();
  if (!j.contains("basis")) throw fail("basis", "missing");
  const Json& b = j.at("basis");
  if (!b.is_array() || static_cast<int>(b.size()) != n)
    throw fail("basis", "must be an array of " + std::to_string(n) + " rows");
  LatticeRecord rec;
  rec.basis.resize(n, n);
  for (int i = 0; i < n; ++i) {
    const std::string row = "basis[" + std::to_string(i) + "]";
    if (!b[i].is_array() || static_cast<int>(b[i].size()) != n)
      throw fail(row, "must be an array of " + std::to_string(n) + " numbers");
    for (int k = 0; k < n; ++k) {
      if (!b[i][k].is_number()) throw fail(row + "[" + std::to_string(k) + "]", "must be a number");
      rec.basis(i, k) = b[i][k].get<double>();
    }
  }
  if (j.contains("id")) {
    if (!j.at("id").is_string()) throw fail("id", "must be a string");
    rec.id = j.at("id").get<std::string>();
  }
  return rec;
}

inline LatticeRecord read_lattice_file(const std::string& path) {
  LatticeRecord rec = parse_lattice_json(detail::read_file(path), path);
  if (rec.id.empty()) {
    const auto slash = path.find_last_of('/');
    std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    if (const auto dot = base.rfind('.'); dot != std::string::npos) base = base.substr(0, dot);
    rec.id = base;
  }
  return rec;
}

/// Shortest round-trip decimal for every entry, so reading back gives the same bits.
inline std::string lattice_to_json(const Matrix& basis, const std::string& id = "") {
  Json j;
  if (!id.empty()) j["id"] = id;
  j["dim"] = basis.rows();
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < basis.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < basis.cols(); ++k) row.push_back(basis(i, k));
    rows.push_back(row);
  }
  j["basis"] = rows;
  return j.dump(2) + "\n";
}

inline void write_lattice_file(const std::string& path, const Matrix& basis, const std::string& id = "") {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path, "file");
  out << lattice_to_json(basis, id);
}

inline Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

/// One record per point: integer coordinates and the embedding.
inline Json points_json(const std::vector<LatticePoint>& pts) {
  Json a = Json::array();
  for (const auto& pt : pts) {
    Json c = Json::array();
    for (Eigen::Index i = 0; i < pt.coords.size(); ++i) c.push_back(pt.coords(i));
    a.push_back({{"coords", c}, {"embedding", vector_json(pt.embedding)}});
  }
  return a;
}

}  // namespace latbound
