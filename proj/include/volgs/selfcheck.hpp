#pragma once

#include <string>
#include <vector>

namespace volgs {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Quick runtime verification used by `volgs check`: analytic gradients
/// against central differences, the BVH renderer against the brute-force
/// integrator, slab-size independence and BVH queries against a linear scan.
std::vector<CheckResult> run_self_checks(unsigned seed = 1);

}  // namespace volgs
