#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oscillat/error.hpp"

namespace oscillat {

/// Flat `section.key -> value` view of an INI-style file:
///
///   # comment
///   [section]
///   key = value
///
/// Values are scalars (`0.25`, `1/16`, `true`, `sine1d`) or bracketed,
/// possibly nested, lists of numbers (`[1/8, 1/16]`, `[[1, 0], [0, 1]]`).
class Config {
 public:
  Config() = default;

  static Config parse(const std::string& text, const std::string& origin = "<string>") {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[' && line.back() == ']' && line.find('=') == std::string::npos) {
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorKind::InvalidConfig, origin + ":" + std::to_string(lineno) + ": expected key = value");
      }
      const std::string key = trim(line.substr(0, eq));
      if (key.empty()) throw Error(ErrorKind::InvalidConfig, origin + ":" + std::to_string(lineno) + ": empty key");
      cfg.values_[section.empty() ? key : section + "." + key] = trim(line.substr(eq + 1));
    }
    return cfg;
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback = "") const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_number(it->second, key);
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::string v = it->second;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw Error(ErrorKind::InvalidConfig, key + ": expected a boolean, got '" + it->second + "'");
  }

  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback = {}) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const auto rows = parse_matrix(it->second, key);
    if (rows.size() == 1) return rows[0];
    std::vector<double> flat;
    for (const auto& r : rows) {
      if (r.size() != 1) throw Error(ErrorKind::InvalidConfig, key + ": expected a flat list");
      flat.push_back(r[0]);
    }
    return flat;
  }

  /// `[[a, b], [c, d]]` as rows; a flat list is a single row.
  std::vector<std::vector<double>> get_matrix(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return {};
    return parse_matrix(it->second, key);
  }

  /// All keys below `prefix.` with the prefix stripped.
  std::map<std::string, std::string> section(const std::string& prefix) const {
    std::map<std::string, std::string> out;
    const std::string p = prefix + ".";
    for (const auto& [k, v] : values_)
      if (k.compare(0, p.size(), p) == 0) out[k.substr(p.size())] = v;
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  static double parse_number(const std::string& raw, const std::string& key = "") {
    const std::string s = trim(raw);
    const auto slash = s.find('/');
    try {
      std::size_t used = 0;
      if (slash != std::string::npos) {
        const std::string a = trim(s.substr(0, slash)), b = trim(s.substr(slash + 1));
        std::size_t ua = 0, ub = 0;
        const double num = std::stod(a, &ua);
        const double den = std::stod(b, &ub);
        if (ua != a.size() || ub != b.size() || den == 0.0) throw std::invalid_argument("fraction");
        return num / den;
      }
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidConfig, (key.empty() ? "" : key + ": ") + "not a number: '" + raw + "'");
    }
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  // Accepts a scalar, a flat list or a list of lists.
  static std::vector<std::vector<double>> parse_matrix(const std::string& raw, const std::string& key) {
    const std::string s = trim(raw);
    if (s.empty() || s.front() != '[') return {{parse_number(s, key)}};
    if (s.back() != ']') throw Error(ErrorKind::InvalidConfig, key + ": unbalanced brackets");
    const std::string inner = trim(s.substr(1, s.size() - 2));
    std::vector<std::vector<double>> rows;
    if (inner.empty()) return {std::vector<double>{}};
    if (inner.front() == '[') {
      int depth = 0;
      std::size_t start = 0;
      for (std::size_t i = 0; i < inner.size(); ++i) {
        if (inner[i] == '[') {
          if (depth++ == 0) start = i;
        } else if (inner[i] == ']') {
          if (--depth == 0) {
            const auto sub = parse_matrix(inner.substr(start, i - start + 1), key);
            rows.push_back(sub[0]);
          }
          if (depth < 0) throw Error(ErrorKind::InvalidConfig, key + ": unbalanced brackets");
        }
      }
      if (depth != 0) throw Error(ErrorKind::InvalidConfig, key + ": unbalanced brackets");
      return rows;
    }
    std::vector<double> row;
    std::stringstream ss(inner);
    std::string tok;
    while (std::getline(ss, tok, ',')) row.push_back(parse_number(tok, key));
    rows.push_back(row);
    return rows;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace oscillat
