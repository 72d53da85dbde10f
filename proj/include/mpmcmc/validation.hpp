#pragma once

#include <string>
#include <vector>

#include "mpmcmc/parallel.hpp"

namespace mpmcmc {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Exact, fast checks on finite chains and closed-form arithmetic:
/// reversibility, Peskun ordering, gap domination, conductance, the MH
/// degeneracy at K = 1, proposal geometry, the balancing identity and the
/// bound regression values.
std::vector<CheckResult> quick_checks(const WorkerPool* pool = nullptr);

/// Statistical checks: simulation/kernel equivalence at one million steps
/// per state, and the Monte-Carlo consistency of the MGF gap bound.
std::vector<CheckResult> full_checks(const WorkerPool* pool = nullptr);

/// True iff every entry passes.
bool all_pass(const std::vector<CheckResult>& results);

/// One line per check: "[ ok ]" / "[FAIL]" + name + detail.
void print_results(const std::vector<CheckResult>& results);

}  // namespace mpmcmc
