#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pfld::harness {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Property and oracle checks over every module (adjoints, codec inverse,
/// score finite differences, gradient checks, weight/resampling invariants,
/// oracle cross-agreement). Backs the `verify` subcommand.
std::vector<CheckResult> run_verification(std::uint64_t seed);

}  // namespace pfld::harness
