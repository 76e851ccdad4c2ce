#pragma once

// Result tables and their serialized forms.
//
// Exact values travel as "p/q" strings. A non-degenerate enclosure is
// written "lo..hi". Float columns are a lossy convenience for plotting and
// are marked as such in results.json.

#include <mpfr.h>
#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "kglab/rational.hpp"

namespace kglab::cli {

using json = nlohmann::ordered_json;

enum class ColumnType { exact, lossy, integer, boolean, text };

inline const char* type_name(ColumnType t) {
  switch (t) {
    case ColumnType::exact:
      return "exact";
    case ColumnType::lossy:
      return "float-lossy";
    case ColumnType::integer:
      return "integer";
    case ColumnType::boolean:
      return "boolean";
    case ColumnType::text:
      return "text";
  }
  return "?";
}

struct Column {
  std::string name;
  ColumnType type;
};

/// Nearest double (get_d truncates).
inline double nearest(const Rational& x) {
  mpfr_t f;
  mpfr_init2(f, 53);
  mpfr_set_q(f, x.get_mpq_t(), MPFR_RNDN);
  const double d = mpfr_get_d(f, MPFR_RNDN);
  mpfr_clear(f);
  return d;
}
inline double nearest(const Enclosure& e) { return nearest(e.midpoint()); }

inline std::string cell(const Rational& x) { return to_string(x); }
inline std::string cell(const Enclosure& e) { return e.exact() ? to_string(e.lo) : to_string(e.lo) + ".." + to_string(e.hi); }
inline std::string cell(const Integer& x) { return x.get_str(); }
inline std::string cell(bool b) { return b ? "true" : "false"; }
inline std::string cell(std::uint64_t x) { return std::to_string(x); }

/// Shortest round-trip decimal for a double.
inline std::string cell(double x) {
  char buf[32];
  for (int digits = 1; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

/// Parses a cell written by cell(Enclosure) back into an enclosure.
inline Enclosure parse_enclosure(const std::string& s) {
  if (const auto dots = s.find(".."); dots != std::string::npos) {
    return {parse_rational(s.substr(0, dots)), parse_rational(s.substr(dots + 2))};
  }
  return Enclosure::point(parse_rational(s));
}

struct Table {
  std::string kind;
  int schema_version = 1;
  std::vector<Column> columns;
  std::vector<std::vector<std::string>> rows;
  json summary = json::object();

  void add(std::vector<std::string> row) {
    if (row.size() != columns.size()) throw std::logic_error("row width does not match the schema");
    rows.push_back(std::move(row));
  }

  std::size_t index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i].name == name) return i;
    }
    throw std::out_of_range("no column '" + name + "'");
  }

  /// RFC 4180: cells holding a comma, quote or newline are quoted.
  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }

  std::string csv() const {
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + quote(columns[i].name);
    out += "\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + quote(row[i]);
      out += "\n";
    }
    return out;
  }

  json to_json() const {
    json doc;
    doc["kind"] = kind;
    doc["schema"] = "kglab." + kind + "/" + std::to_string(schema_version);
    json cols = json::array();
    for (const auto& c : columns) cols.push_back({{"name", c.name}, {"type", type_name(c.type)}});
    doc["columns"] = cols;
    json rs = json::array();
    for (const auto& row : rows) {
      json r = json::object();
      for (std::size_t i = 0; i < row.size(); ++i) {
        switch (columns[i].type) {
          case ColumnType::lossy:
            r[columns[i].name] = std::stod(row[i]);
            break;
          case ColumnType::integer:
            r[columns[i].name] = std::stoll(row[i]);
            break;
          case ColumnType::boolean:
            r[columns[i].name] = row[i] == "true";
            break;
          default:
            r[columns[i].name] = row[i];
        }
      }
      rs.push_back(r);
    }
    doc["rows"] = rs;
    doc["summary"] = summary;
    return doc;
  }

  /// Inverse of to_json, used by plotdata and the round-trip check.
  static Table from_json(const json& doc) {
    Table t;
    t.kind = doc.at("kind").get<std::string>();
    const std::string schema = doc.at("schema").get<std::string>();
    t.schema_version = std::stoi(schema.substr(schema.rfind('/') + 1));
    for (const auto& c : doc.at("columns")) {
      const std::string type = c.at("type").get<std::string>();
      ColumnType ct = ColumnType::text;
      for (auto candidate : {ColumnType::exact, ColumnType::lossy, ColumnType::integer, ColumnType::boolean}) {
        if (type == type_name(candidate)) ct = candidate;
      }
      t.columns.push_back({c.at("name").get<std::string>(), ct});
    }
    for (const auto& r : doc.at("rows")) {
      std::vector<std::string> row;
      for (const auto& c : t.columns) {
        const auto& v = r.at(c.name);
        switch (c.type) {
          case ColumnType::lossy:
            row.push_back(cell(v.get<double>()));
            break;
          case ColumnType::integer:
            row.push_back(std::to_string(v.get<std::int64_t>()));
            break;
          case ColumnType::boolean:
            row.push_back(cell(v.get<bool>()));
            break;
          default:
            row.push_back(v.get<std::string>());
        }
      }
      t.rows.push_back(std::move(row));
    }
    t.summary = doc.value("summary", json::object());
    return t;
  }
};

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << bytes;
  if (!out) throw std::runtime_error("short write to " + p.string());
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Widest enclosure per exact column, as exact and float values.
inline json enclosure_widths(const Table& t) {
  json out = json::object();
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (t.columns[i].type != ColumnType::exact) continue;
    Rational widest = 0;
    bool any = false;
    for (const auto& row : t.rows) {
      if (row[i].find("..") == std::string::npos) continue;
      any = true;
      widest = std::max(widest, parse_enclosure(row[i]).width());
    }
    if (any) out[t.columns[i].name] = {{"exact", to_string(widest)}, {"float", nearest(widest)}};
  }
  return out;
}

}  // namespace kglab::cli
