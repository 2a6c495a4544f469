#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace gffsle {

/// One pass/fail statistic. `threshold` is the bound the statistic is held to.
struct Check {
  std::string name;
  double statistic = 0.0;
  double std_error = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

struct Report {
  std::string name;
  std::vector<Check> checks;
  nlohmann::json details = nlohmann::json::object();

  /// True when every check passed (and there is at least one).
  bool passed() const;
  Check& add(std::string check_name, double statistic, double std_error, double threshold, bool passed);
  nlohmann::json to_json() const;
};

}  // namespace gffsle
