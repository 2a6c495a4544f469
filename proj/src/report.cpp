#include "gffsle/report.hpp"

#include <algorithm>
#include <cmath>

namespace gffsle {

bool Report::passed() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

Check& Report::add(std::string check_name, double statistic, double std_error, double threshold, bool ok) {
  checks.push_back({std::move(check_name), statistic, std_error, threshold, ok});
  return checks.back();
}

nlohmann::json Report::to_json() const {
  auto num = [](double x) -> nlohmann::json { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
  nlohmann::json j;
  j["name"] = name;
  j["passed"] = passed();
  auto& arr = j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name},
                   {"statistic", num(c.statistic)},
                   {"std_error", num(c.std_error)},
                   {"threshold", num(c.threshold)},
                   {"passed", c.passed}});
  }
  j["details"] = details;
  return j;
}

}  // namespace gffsle
