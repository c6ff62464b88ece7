#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mscreen/kernel.hpp"
#include "mscreen/optimizer.hpp"
#include "mscreen/types.hpp"

namespace mscreen {

/// Reference projection: enumerate candidate active sets of the free part and
/// keep the feasible candidate closest to v. Exponential in p; intended for
/// p <= ~12 as an independent check of project().
Vector project_bruteforce(const Vector& v, const ConstraintSet& cs);

struct OracleOptions {
  KernelSpec kernel = KernelSpec::neg_exp();
  int threads = 0;
  std::uint64_t seed = 1;
  // Test hook: applied to every analytic gradient before it is compared with
  // finite differences. Used to verify the check trips on a broken gradient.
  std::function<Vector(const Vector&)> gradient_hook;
};

struct OracleCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Runs the independent-oracle suite: the enumerated interaction closed form
/// against the population objective, analytic gradients against central
/// differences, projection against the brute-force solver, and the class
/// balance identity of the fitted weights.
std::vector<OracleCheck> run_oracle_checks(const OracleOptions& opts = {});

}  // namespace mscreen
