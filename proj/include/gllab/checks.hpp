#ifndef GLLAB_CHECKS_HPP
#define GLLAB_CHECKS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace gllab {

struct CheckOutcome {
  std::string name;
  bool pass = false;
  double value = 0;
  double tolerance = 0;
  std::string detail;
  /// Wall-clock values are left out of the JSON so reports stay reproducible.
  bool volatile_value = false;
};

struct SuiteReport {
  std::string suite;
  int criterion = 0;
  std::vector<CheckOutcome> checks;
  nlohmann::json data = nlohmann::json::object();  ///< suite-specific numbers behind the checks
  bool pass() const;
  nlohmann::json to_json() const;
};

/// prop41, threshold, certificate, innervar, identities, vortex, obstacle, iwaniec, criticality,
/// monotone1d, determinism; in criterion order.
const std::vector<std::string>& suite_names();

/// Throws std::invalid_argument for an unknown name. Numerical exceptions raised inside a suite
/// are turned into failed checks.
SuiteReport run_suite(const std::string& name, std::uint64_t seed = 42);

}  // namespace gllab

#endif
