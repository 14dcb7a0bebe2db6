#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "zetalab/errors.hpp"

namespace zetalab {

/// Flat key = value experiment settings. Values stay as the user wrote them;
/// typed getters parse on demand.
struct ExperimentConfig {
  std::string experiment;
  std::map<std::string, std::string> values;

  static std::string normalize_key(std::string k) {
    for (auto &c : k)
      if (c == '-')
        c = '_';
    return k;
  }

  void set(const std::string &key, const std::string &value) { values[normalize_key(key)] = value; }
  bool has(const std::string &key) const { return values.count(normalize_key(key)) > 0; }

  /// '#' starts a comment; blank lines are skipped.
  void load_file(const std::string &path) {
    std::ifstream f(path);
    if (!f)
      throw validation_error("cannot read config file " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
      ++lineno;
      if (auto h = line.find('#'); h != std::string::npos)
        line.erase(h);
      const auto eq = line.find('=');
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      if (trim(line).empty())
        continue;
      if (eq == std::string::npos)
        throw validation_error(path + ":" + std::to_string(lineno) + ": expected key = value");
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
  }

  std::string str(const std::string &key, const std::string &dflt) const {
    auto it = values.find(normalize_key(key));
    return it == values.end() ? dflt : it->second;
  }

  double real(const std::string &key, double dflt) const {
    auto it = values.find(normalize_key(key));
    if (it == values.end())
      return dflt;
    try {
      std::size_t used = 0;
      const double v = std::stod(it->second, &used);
      if (used != it->second.size())
        throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception &) {
      throw validation_error("config key " + key + ": not a number: " + it->second);
    }
  }

  /// Accepts 1e6-style spellings as long as the value is integral.
  std::uint64_t count(const std::string &key, std::uint64_t dflt) const {
    if (!has(key))
      return dflt;
    const double v = real(key, 0);
    if (!(v >= 0) || v != std::floor(v) || v > 1e18)
      throw validation_error("config key " + key + ": expected a nonnegative integer");
    return static_cast<std::uint64_t>(v);
  }

  int integer(const std::string &key, int dflt) const {
    if (!has(key))
      return dflt;
    const double v = real(key, 0);
    if (v != std::floor(v) || std::fabs(v) > 1e9)
      throw validation_error("config key " + key + ": expected an integer");
    return static_cast<int>(v);
  }

  /// Comma- or space-separated reals.
  std::vector<double> list(const std::string &key, std::vector<double> dflt) const {
    if (!has(key))
      return dflt;
    std::string s = str(key, "");
    for (auto &c : s)
      if (c == ',')
        c = ' ';
    std::istringstream is(s);
    std::vector<double> out;
    std::string tok;
    while (is >> tok) {
      try {
        out.push_back(std::stod(tok));
      } catch (const std::exception &) {
        throw validation_error("config key " + key + ": not a number: " + tok);
      }
    }
    return out;
  }
};

} // namespace zetalab
