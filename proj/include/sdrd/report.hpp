#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdrd/estimates.hpp"

namespace sdrd {

struct Report {
  std::vector<CheckResult> checks;

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

inline nlohmann::json check_to_json(const CheckResult& c) {
  nlohmann::json j;
  j["check_id"] = c.check_id;
  j["reference"] = c.reference;
  j["verdict"] = c.pass ? "PASS" : "FAIL";
  nlohmann::json consts = nlohmann::json::object();
  for (const auto& [name, value] : c.constants) consts[name] = value;
  j["constants"] = consts;
  j["detail"] = c.detail;
  j["inputs_digest"] = c.inputs_digest;
  return j;
}

inline nlohmann::json report_to_json(const Report& r) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : r.checks) j.push_back(check_to_json(c));
  return j;
}

inline void write_report(const std::string& path, const Report& r) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << report_to_json(r).dump(2) << "\n";
  if (!os) throw std::runtime_error("write failed for " + path);
}

}  // namespace sdrd
