#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "zetalab/stats.hpp"

namespace zetalab {

using json = nlohmann::ordered_json;

/// JSON number, with non-finite values spelled out (JSON has no inf/nan).
inline json num(double x) {
  if (std::isnan(x))
    return "nan";
  if (std::isinf(x))
    return x > 0 ? "inf" : "-inf";
  return x;
}

/// A numeric field with its provenance tag: estimate, exact, target or input.
inline json tagged(double value, const char *tag) { return json{{"value", num(value)}, {"tag", tag}}; }
inline json tagged(const Estimate &e) {
  return json{{"value", num(e.value)}, {"stderr", num(e.stderr)}, {"tag", "estimate"}};
}

struct CheckRecord {
  std::string name;
  json estimate;       // tagged value
  std::string formula; // what the estimate is compared with
  json target;         // tagged value, or null
  bool pass = false;
  bool inconclusive = false;
  std::string note;
};

struct LedgerEntry {
  std::string name;
  json value; // tagged value, or a string for shape tags
  std::string note;
};

struct Report {
  std::string experiment;
  std::map<std::string, std::string> inputs; // verbatim
  json effective = json::object();           // parsed parameters actually used
  std::vector<CheckRecord> checks;
  std::vector<LedgerEntry> constants;
  std::vector<std::string> artifacts;

  CheckRecord &check(std::string name, json estimate, std::string formula, json target, bool pass,
                     std::string note = {}) {
    checks.push_back({std::move(name), std::move(estimate), std::move(formula), std::move(target),
                      pass, false, std::move(note)});
    return checks.back();
  }
  void constant(std::string name, json value, std::string note = {}) {
    constants.push_back({std::move(name), std::move(value), std::move(note)});
  }

  bool all_pass() const {
    for (const auto &c : checks)
      if (!c.pass)
        return false;
    return true;
  }
  bool any_failure() const {
    for (const auto &c : checks)
      if (!c.pass && !c.inconclusive)
        return true;
    return false;
  }
  bool any_inconclusive() const {
    for (const auto &c : checks)
      if (c.inconclusive)
        return true;
    return false;
  }
  /// 0 all pass, 1 some check failed, 3 only inconclusive checks short of passing.
  int exit_code() const { return any_failure() ? 1 : any_inconclusive() ? 3 : 0; }

  json to_json() const {
    json j;
    j["schema"] = "report_v1";
    j["experiment"] = experiment;
    j["inputs"] = json::object();
    for (const auto &[k, v] : inputs)
      j["inputs"][k] = v;
    j["effective"] = effective;
    j["checks"] = json::array();
    for (const auto &c : checks) {
      json r;
      r["name"] = c.name;
      r["estimate"] = c.estimate;
      r["formula"] = c.formula;
      r["target"] = c.target;
      r["pass"] = c.pass;
      r["inconclusive"] = c.inconclusive;
      if (!c.note.empty())
        r["note"] = c.note;
      j["checks"].push_back(r);
    }
    j["constants"] = json::array();
    for (const auto &c : constants) {
      json r{{"name", c.name}, {"value", c.value}};
      if (!c.note.empty())
        r["note"] = c.note;
      j["constants"].push_back(r);
    }
    j["artifacts"] = artifacts;
    j["pass"] = all_pass();
    j["inconclusive"] = any_inconclusive();
    return j;
  }

  void write(const std::string &path) const {
    std::ofstream f(path);
    f << to_json().dump(2) << '\n';
  }
};

} // namespace zetalab
