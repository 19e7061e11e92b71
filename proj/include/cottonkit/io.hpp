#pragma once

// File formats: metric, reduced-data, vector-field and transform JSON, check
// reports, run configuration and CSV tables.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "cottonkit/catalog.hpp"
#include "cottonkit/expr.hpp"
#include "cottonkit/metric.hpp"
#include "cottonkit/reduction.hpp"
#include "cottonkit/report.hpp"
#include "cottonkit/symmetry.hpp"

namespace cottonkit {

using json = nlohmann::ordered_json;

inline constexpr const char* kSchema = "cottonkit/1";

/// Malformed input file or configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void only_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + " must be a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw ConfigError("unknown key '" + k + "' in " + what);
}

inline const json& need(const json& j, const char* key, const std::string& what) {
  if (!j.contains(key)) throw ConfigError(what + " lacks '" + key + "'");
  return j.at(key);
}

inline std::string text_of(const json& j, const std::string& what) {
  if (!j.is_string()) throw ConfigError(what + " must be a string");
  return j.get<std::string>();
}

inline double number_of(const json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError(what + " must be a number");
  return j.get<double>();
}

inline ExprAst expr_of(const json& j, const std::string& what) {
  const std::string s = text_of(j, what);
  try {
    return parse_expr(s);
  } catch (const ParseError& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

inline std::vector<std::string> names_of(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& v : j) out.push_back(text_of(v, what));
  return out;
}

inline ParamEnv env_of(const json& j) {
  if (!j.is_object()) throw ConfigError("parameters must be an object");
  ParamEnv env;
  for (const auto& [k, v] : j.items()) env[k] = number_of(v, "parameter '" + k + "'");
  return env;
}

inline json env_json(const ParamEnv& env) {
  json j = json::object();
  for (const auto& [k, v] : env) j[k] = v;
  return j;
}

// JSON has no NaN or infinity; NaN is written as null, infinities as strings.
inline json real_json(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline double real_of(const json& j, const std::string& what) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  return number_of(j, what);
}

template <class Fn>
auto guarded(const std::string& what, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Metrics

inline json metric_to_json(const MetricSpec& m) {
  json j;
  j["dim"] = m.dim();
  j["coordinates"] = m.coordinates();
  j["parameters"] = detail::env_json(m.env());
  json comps = json::object();
  for (int i = 0; i < m.dim(); ++i)
    for (int k = i; k < m.dim(); ++k)
      if (!m.component(i, k).is_zero_literal())
        comps[m.coordinates()[i] + "," + m.coordinates()[k]] = to_string(m.component(i, k));
  j["components"] = comps;
  if (m.orientation() != 1) j["orientation"] = m.orientation();
  return j;
}

inline MetricSpec metric_from_json(const json& j) {
  const std::string what = "metric";
  detail::only_keys(j, {"dim", "coordinates", "parameters", "components", "orientation"}, what);
  const auto coords = detail::names_of(detail::need(j, "coordinates", what), "coordinates");
  const json& dim = detail::need(j, "dim", what);
  if (!dim.is_number_integer() || dim.get<int>() != static_cast<int>(coords.size()))
    throw ConfigError("metric 'dim' must be an integer equal to the number of coordinates");
  const ParamEnv env = j.contains("parameters") ? detail::env_of(j.at("parameters")) : ParamEnv{};
  int orientation = 1;
  if (j.contains("orientation")) {
    if (!j.at("orientation").is_number_integer()) throw ConfigError("orientation must be +1 or -1");
    orientation = j.at("orientation").get<int>();
  }
  return detail::guarded(what, [&] {
    MetricSpec m(coords, env, orientation);
    std::set<std::pair<int, int>> seen;
    const json& comps = detail::need(j, "components", what);
    if (!comps.is_object()) throw ConfigError("metric components must be an object");
    for (const auto& [key, val] : comps.items()) {
      const std::size_t comma = key.find(',');
      if (comma == std::string::npos) throw ConfigError("component key '" + key + "' must be 'a,b'");
      int a = m.coordinate_index(key.substr(0, comma));
      int b = m.coordinate_index(key.substr(comma + 1));
      if (a > b) std::swap(a, b);
      if (!seen.insert({a, b}).second) throw ConfigError("component '" + key + "' given twice");
      m.set(a, b, detail::expr_of(val, "component '" + key + "'"));
    }
    return m;
  });
}

// ---------------------------------------------------------------------------
// Reduced data: {"g2": <metric>, "a": [a_t, a_x], "phi": "1"}

inline json reduced_to_json(const ReducedData& rd) {
  json j;
  j["g2"] = metric_to_json(rd.g2);
  j["a"] = {to_string(rd.a[0]), to_string(rd.a[1])};
  j["phi"] = to_string(rd.phi);
  return j;
}

inline ReducedData reduced_from_json(const json& j) {
  detail::only_keys(j, {"g2", "a", "phi"}, "reduced data");
  ReducedData rd{metric_from_json(detail::need(j, "g2", "reduced data"))};
  if (rd.g2.dim() != 2) throw ConfigError("reduced data needs a 2-dimensional g2");
  const json& a = detail::need(j, "a", "reduced data");
  if (!a.is_array() || a.size() != 2) throw ConfigError("reduced data 'a' must hold two expressions");
  for (int i = 0; i < 2; ++i) rd.a[i] = detail::expr_of(a[i], "a[" + std::to_string(i) + "]");
  if (j.contains("phi")) rd.phi = detail::expr_of(j.at("phi"), "phi");
  detail::guarded("reduced data", [&] {
    for (const auto& e : {rd.a[0], rd.a[1], rd.phi}) validate_symbols(e, rd.g2.coordinates(), rd.g2.env());
    return 0;
  });
  return rd;
}

// ---------------------------------------------------------------------------
// Vector fields: {"coordinates": [...], "parameters": {...}, "fields": [[...], ...]}

struct FieldSet {
  std::vector<std::string> coordinates;
  ParamEnv env;
  std::vector<VectorFieldSpec> fields;
};

inline json fields_to_json(const FieldSet& fs) {
  json j;
  j["coordinates"] = fs.coordinates;
  j["parameters"] = detail::env_json(fs.env);
  json arr = json::array();
  for (const auto& f : fs.fields) {
    json row = json::array();
    for (const auto& e : f) row.push_back(to_string(e));
    arr.push_back(row);
  }
  j["fields"] = arr;
  return j;
}

inline FieldSet fields_from_json(const json& j) {
  detail::only_keys(j, {"coordinates", "parameters", "fields"}, "fields file");
  FieldSet fs;
  fs.coordinates = detail::names_of(detail::need(j, "coordinates", "fields file"), "coordinates");
  if (j.contains("parameters")) fs.env = detail::env_of(j.at("parameters"));
  const json& arr = detail::need(j, "fields", "fields file");
  if (!arr.is_array()) throw ConfigError("'fields' must be an array");
  for (const auto& row : arr) {
    if (!row.is_array() || row.size() != fs.coordinates.size())
      throw ConfigError("each field needs one component per coordinate");
    VectorFieldSpec v;
    for (const auto& e : row) v.push_back(detail::expr_of(e, "field component"));
    detail::guarded("fields file", [&] {
      for (const auto& e : v) validate_symbols(e, fs.coordinates, fs.env);
      return 0;
    });
    fs.fields.push_back(std::move(v));
  }
  return fs;
}

inline json transform_to_json(const TransformSpec& tr) {
  json j;
  j["source"] = tr.source;
  j["target"] = tr.target;
  j["parameters"] = detail::env_json(tr.env);
  json map = json::array();
  for (const auto& e : tr.map) map.push_back(to_string(e));
  j["map"] = map;
  j["omega"] = to_string(tr.omega);
  j["domain"] = tr.domain;
  return j;
}

// ---------------------------------------------------------------------------
// Check reports

inline json report_to_json(const CheckReport& r, bool stable = false) {
  json j;
  j["id"] = r.id;
  j["case"] = r.case_tag;
  j["params"] = detail::env_json(r.params);
  j["grid"] = r.grid;
  j["max_residual"] = detail::real_json(r.max_residual);
  j["tolerance"] = detail::real_json(r.tolerance);
  j["pass"] = r.pass;
  json wp = json::array();
  for (double v : r.worst_point) wp.push_back(detail::real_json(v));
  j["worst_point"] = wp;
  j["worst_value"] = detail::real_json(r.worst_value);
  if (!stable) j["wall_time"] = r.wall_time;
  json d = json::object();
  for (const auto& [k, v] : r.details) d[k] = detail::real_json(v);
  j["details"] = d;
  j["message"] = r.message;
  return j;
}

inline CheckReport report_from_json(const json& j) {
  detail::only_keys(j, {"id", "case", "params", "grid", "max_residual", "tolerance", "pass", "worst_point", "worst_value",
                        "wall_time", "details", "message"},
                    "check report");
  CheckReport r;
  r.id = detail::text_of(detail::need(j, "id", "check report"), "id");
  if (j.contains("case")) r.case_tag = detail::text_of(j.at("case"), "case");
  if (j.contains("params")) r.params = detail::env_of(j.at("params"));
  if (j.contains("grid")) r.grid = detail::text_of(j.at("grid"), "grid");
  r.max_residual = detail::real_of(detail::need(j, "max_residual", "check report"), "max_residual");
  r.tolerance = detail::real_of(detail::need(j, "tolerance", "check report"), "tolerance");
  const json& pass = detail::need(j, "pass", "check report");
  if (!pass.is_boolean()) throw ConfigError("'pass' must be a boolean");
  r.pass = pass.get<bool>();
  if (j.contains("worst_point"))
    for (const auto& v : j.at("worst_point")) r.worst_point.push_back(detail::real_of(v, "worst_point"));
  if (j.contains("worst_value")) r.worst_value = detail::real_of(j.at("worst_value"), "worst_value");
  if (j.contains("wall_time")) r.wall_time = detail::number_of(j.at("wall_time"), "wall_time");
  if (j.contains("details")) {
    if (!j.at("details").is_object()) throw ConfigError("'details' must be an object");
    for (const auto& [k, v] : j.at("details").items()) r.details[k] = detail::real_of(v, "detail '" + k + "'");
  }
  if (j.contains("message")) r.message = detail::text_of(j.at("message"), "message");
  return r;
}

inline std::size_t failed_count(const std::vector<CheckReport>& reports) {
  std::size_t n = 0;
  for (const auto& r : reports) n += !r.pass;
  return n;
}

inline json report_document(const std::vector<CheckReport>& reports, bool stable = false) {
  json j;
  j["schema"] = kSchema;
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(report_to_json(r, stable));
  j["reports"] = arr;
  j["summary"] = {{"checks", reports.size()}, {"failed", failed_count(reports)}};
  return j;
}

inline std::vector<CheckReport> reports_from_document(const json& j) {
  detail::only_keys(j, {"schema", "reports", "summary"}, "report document");
  if (detail::need(j, "schema", "report document") != kSchema)
    throw ConfigError(std::string("report schema must be '") + kSchema + "'");
  std::vector<CheckReport> out;
  for (const auto& r : detail::need(j, "reports", "report document")) out.push_back(report_from_json(r));
  return out;
}

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
  double C = 1.0;
  bool thorough = false;
  std::map<std::string, double> tolerances;  // by check id; "*" applies to all
  std::map<std::string, std::string> grids;  // "2d" and "3d" grid specs
  std::vector<std::string> checks;           // empty: default suite
  std::vector<std::string> cases;            // empty: every catalog case
  std::string output;                        // report file or directory
  std::string profiles;                      // directory for CSV profiles
  std::string format = "json";
  bool stable_output = false;

  std::vector<double> c_values() const {
    if (!thorough) return {C};
    std::vector<double> v{0.25, 1.0, 9.0};
    if (std::find(v.begin(), v.end(), C) == v.end()) v.push_back(C);
    std::sort(v.begin(), v.end());
    return v;
  }
};

inline void validate_format(const std::string& f) {
  if (f != "json" && f != "text" && f != "csv") throw ConfigError("format must be json, text or csv");
}

inline RunConfig config_from_json(const json& j) {
  detail::only_keys(j, {"C", "thorough", "tolerances", "grids", "checks", "cases", "output", "profiles", "format",
                        "stable_output"},
                    "run configuration");
  RunConfig c;
  if (j.contains("C")) c.C = detail::number_of(j.at("C"), "C");
  if (!std::isfinite(c.C) || c.C == 0) throw ConfigError("C must be finite and nonzero");
  if (j.contains("thorough")) {
    if (!j.at("thorough").is_boolean()) throw ConfigError("'thorough' must be a boolean");
    c.thorough = j.at("thorough").get<bool>();
  }
  if (j.contains("tolerances")) {
    if (!j.at("tolerances").is_object()) throw ConfigError("'tolerances' must be an object");
    for (const auto& [k, v] : j.at("tolerances").items()) {
      const double t = detail::number_of(v, "tolerance '" + k + "'");
      if (!(t >= 0)) throw ConfigError("tolerance '" + k + "' must be nonnegative");
      c.tolerances[k] = t;
    }
  }
  if (j.contains("grids")) {
    detail::only_keys(j.at("grids"), {"2d", "3d"}, "grids");
    for (const auto& [k, v] : j.at("grids").items()) c.grids[k] = detail::text_of(v, "grid '" + k + "'");
  }
  if (j.contains("checks")) c.checks = detail::names_of(j.at("checks"), "checks");
  if (j.contains("cases")) c.cases = detail::names_of(j.at("cases"), "cases");
  if (j.contains("output")) c.output = detail::text_of(j.at("output"), "output");
  if (j.contains("profiles")) c.profiles = detail::text_of(j.at("profiles"), "profiles");
  if (j.contains("format")) c.format = detail::text_of(j.at("format"), "format");
  validate_format(c.format);
  if (j.contains("stable_output")) {
    if (!j.at("stable_output").is_boolean()) throw ConfigError("'stable_output' must be a boolean");
    c.stable_output = j.at("stable_output").get<bool>();
  }
  return c;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// Tables

/// Shortest round-trip decimal form; independent of the C locale.
inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + csv_field(header[i]);
  out += '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw std::invalid_argument("CSV row width differs from header");
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_real(row[i]);
    out += '\n';
  }
  return out;
}

inline std::string params_string(const ParamEnv& env) {
  std::string s;
  for (const auto& [k, v] : env) s += (s.empty() ? "" : ";") + k + "=" + format_real(v);
  return s;
}

inline std::string reports_text(const std::vector<CheckReport>& reports, bool stable = false) {
  std::ostringstream os;
  for (const auto& r : reports) {
    os << (r.pass ? "PASS " : "FAIL ") << r.id;
    if (!r.case_tag.empty()) os << " [" << r.case_tag << "]";
    if (!r.params.empty()) os << " " << params_string(r.params);
    os << " max=" << format_real(r.max_residual) << " tol=" << format_real(r.tolerance);
    if (!stable) os << " time=" << format_real(std::round(r.wall_time * 1000) / 1000) << "s";
    if (!r.message.empty()) os << " (" << r.message << ")";
    os << '\n';
  }
  os << failed_count(reports) << " of " << reports.size() << " checks failed\n";
  return os.str();
}

inline std::string reports_csv(const std::vector<CheckReport>& reports, bool stable = false) {
  std::string out = "id,case,params,grid,max_residual,tolerance,pass,worst_point,worst_value";
  out += stable ? ",message\n" : ",wall_time,message\n";
  for (const auto& r : reports) {
    std::string wp;
    for (double v : r.worst_point) wp += (wp.empty() ? "" : ";") + format_real(v);
    out += csv_field(r.id) + ',' + csv_field(r.case_tag) + ',' + csv_field(params_string(r.params)) + ',' +
           csv_field(r.grid) + ',' + format_real(r.max_residual) + ',' + format_real(r.tolerance) + ',' +
           (r.pass ? "true" : "false") + ',' + csv_field(wp) + ',' + format_real(r.worst_value) + ',';
    if (!stable) out += format_real(r.wall_time) + ',';
    out += csv_field(r.message) + '\n';
  }
  return out;
}

inline std::string format_reports(const std::vector<CheckReport>& reports, const std::string& format, bool stable) {
  if (format == "text") return reports_text(reports, stable);
  if (format == "csv") return reports_csv(reports, stable);
  return report_document(reports, stable).dump(2) + "\n";
}

}  // namespace cottonkit
