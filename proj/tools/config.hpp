#pragma once

// Flat "key = value" experiment configs.
//
// One entry per line, '#' starts a comment, keys are unique and every file
// must carry "version = 1". Values are read lazily through typed accessors;
// finish() rejects any key no accessor asked for, so typos fail loudly.

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "kglab/rational.hpp"

namespace kglab::cli {

inline constexpr int kConfigVersion = 1;

/// Validation failure; the message carries source, line and field.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(trim(item));
      item.clear();
    } else {
      item.push_back(ch);
    }
  }
  out.push_back(trim(item));
  return out;
}

class Config {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static Config parse(std::istream& in, const std::string& source) {
    Config cfg;
    cfg.source_ = source;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
      const std::string text = trim(raw);
      if (text.empty()) continue;
      const auto eq = text.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(source + ":" + std::to_string(line) + ": expected 'key = value', got '" + text + "'");
      }
      const std::string key = trim(text.substr(0, eq));
      if (key.empty()) throw ConfigError(source + ":" + std::to_string(line) + ": missing key before '='");
      for (char ch : key) {
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_') {
          throw ConfigError(source + ":" + std::to_string(line) + ": invalid key '" + key + "'");
        }
      }
      if (const auto it = cfg.entries_.find(key); it != cfg.entries_.end()) {
        throw ConfigError(source + ":" + std::to_string(line) + ": field '" + key + "': duplicate (first set on line " +
                          std::to_string(it->second.line) + ")");
      }
      cfg.entries_[key] = {trim(text.substr(eq + 1)), line};
    }
    cfg.check_version();
    return cfg;
  }

  /// Rebuilds a config from stored key/value pairs (line numbers are lost).
  static Config from_map(const std::map<std::string, std::string>& kv, const std::string& source) {
    Config cfg;
    cfg.source_ = source;
    for (const auto& [k, v] : kv) cfg.entries_[k] = {v, 0};
    cfg.check_version();
    return cfg;
  }

  const std::string& source() const { return source_; }
  const std::map<std::string, Entry>& entries() const { return entries_; }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    const auto it = entries_.find(key);
    const std::string where = it != entries_.end() && it->second.line > 0
                                  ? source_ + ":" + std::to_string(it->second.line)
                                  : source_;
    throw ConfigError(where + ": field '" + key + "': " + message);
  }

  const std::string& text(const std::string& key) const {
    used_.insert(key);
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError(source_ + ": field '" + key + "': required but missing");
    return it->second.value;
  }

  std::string text_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
  }

  std::string choice(const std::string& key, const std::vector<std::string>& options,
                     std::optional<std::string> fallback = std::nullopt) const {
    if (!has(key) && fallback) return *fallback;
    const std::string v = text(key);
    for (const auto& o : options) {
      if (v == o) return v;
    }
    std::string list;
    for (const auto& o : options) list += (list.empty() ? "" : ", ") + o;
    fail(key, "'" + v + "' is not one of {" + list + "}");
  }

  std::int64_t integer(const std::string& key, std::int64_t lo, std::int64_t hi,
                       std::optional<std::int64_t> fallback = std::nullopt) const {
    if (!has(key) && fallback) return *fallback;
    return parse_integer(key, text(key), lo, hi);
  }

  Rational rational(const std::string& key, std::optional<Rational> fallback = std::nullopt) const {
    if (!has(key) && fallback) return *fallback;
    return parse_rational_field(key, text(key));
  }

  std::vector<Rational> rational_list(const std::string& key) const {
    std::vector<Rational> out;
    const std::string v = text(key);
    if (v.empty()) return out;
    for (const auto& item : split(v, ',')) out.push_back(parse_rational_field(key, item));
    return out;
  }

  std::vector<std::int64_t> integer_list(const std::string& key, std::int64_t lo, std::int64_t hi) const {
    std::vector<std::int64_t> out;
    const std::string v = text(key);
    if (v.empty()) fail(key, "empty list");
    for (const auto& item : split(v, ',')) out.push_back(parse_integer(key, item, lo, hi));
    return out;
  }

  /// Cutoff schedule: comma-separated terms, each an integer, 2^k, a power
  /// range 2^a..2^b, or an integer range a..b. Sorted and deduplicated.
  std::vector<std::uint64_t> schedule(const std::string& key, std::uint64_t max_cutoff) const {
    const std::string v = text(key);
    if (v.empty()) fail(key, "empty Q schedule");
    std::set<std::uint64_t> out;
    const auto max = static_cast<std::int64_t>(max_cutoff);
    for (const auto& term : split(v, ',')) {
      if (term.empty()) fail(key, "empty term in Q schedule");
      if (const auto dots = term.find(".."); dots != std::string::npos) {
        const std::string a = trim(term.substr(0, dots));
        const std::string b = trim(term.substr(dots + 2));
        if (a.rfind("2^", 0) == 0 && b.rfind("2^", 0) == 0) {
          const auto ea = parse_integer(key, a.substr(2), 0, 62);
          const auto eb = parse_integer(key, b.substr(2), 0, 62);
          if (ea > eb) fail(key, "empty range '" + term + "'");
          for (auto e = ea; e <= eb; ++e) out.insert(checked_cutoff(key, std::int64_t{1} << e, max));
        } else {
          const auto lo = parse_integer(key, a, 1, max);
          const auto hi = parse_integer(key, b, 1, max);
          if (lo > hi) fail(key, "empty range '" + term + "'");
          for (auto q = lo; q <= hi; ++q) out.insert(static_cast<std::uint64_t>(q));
        }
      } else if (term.rfind("2^", 0) == 0) {
        out.insert(checked_cutoff(key, std::int64_t{1} << parse_integer(key, term.substr(2), 0, 62), max));
      } else {
        out.insert(static_cast<std::uint64_t>(parse_integer(key, term, 1, max)));
      }
    }
    return {out.begin(), out.end()};
  }

  void set(const std::string& key, const std::string& value) { entries_[key] = {value, 0}; }

  /// Rejects keys that were never read.
  void finish() const {
    for (const auto& [key, entry] : entries_) {
      if (used_.count(key) == 0) fail(key, "unknown or unused for this experiment kind");
    }
  }

 private:
  void check_version() {
    if (!has("version")) throw ConfigError(source_ + ": field 'version': required but missing");
    integer("version", kConfigVersion, kConfigVersion);
  }

  std::int64_t parse_integer(const std::string& key, const std::string& v, std::int64_t lo, std::int64_t hi) const {
    std::size_t used = 0;
    std::int64_t x = 0;
    try {
      x = std::stoll(v, &used);
    } catch (const std::exception&) {
      fail(key, "'" + v + "' is not an integer");
    }
    if (used != v.size()) fail(key, "'" + v + "' is not an integer");
    if (x < lo || x > hi) {
      fail(key, std::to_string(x) + " is outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return x;
  }

  std::uint64_t checked_cutoff(const std::string& key, std::int64_t q, std::int64_t max) const {
    if (q > max) fail(key, "cutoff " + std::to_string(q) + " exceeds " + std::to_string(max));
    return static_cast<std::uint64_t>(q);
  }

  Rational parse_rational_field(const std::string& key, const std::string& v) const {
    try {
      return parse_rational(v);
    } catch (const std::exception& e) {
      fail(key, e.what());
    }
  }

  std::string source_;
  std::map<std::string, Entry> entries_;
  mutable std::set<std::string> used_;
};

}  // namespace kglab::cli
