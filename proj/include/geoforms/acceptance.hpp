#pragma once

// The acceptance gate: eleven end-to-end checks pinning the library against
// closed-form targets (round spheres, warped products, sinh/sin defining
// densities) with fixed tolerances. Used by the dedicated acceptance test
// binary and by the CLI `selftest` command.

#include <string>
#include <vector>

namespace geoforms {

struct CriterionResult {
  int index = 0;
  std::string name;
  bool pass = false;
  std::string detail;  // worst residuals or the failure reason
};

std::vector<CriterionResult> run_acceptance();

bool all_passed(const std::vector<CriterionResult>& results);

// "[PASS] 3 fiber-like formulas (...)" one line per criterion.
std::string format_acceptance(const std::vector<CriterionResult>& results);

}  // namespace geoforms
