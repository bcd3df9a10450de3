#pragma once

#include "distopt/problem.hpp"
#include "distopt/report.hpp"

namespace distopt {

struct RunOptions {
  /// Also run the brute-force oracle and report errors against it.
  bool with_oracle = false;
  int threads = 1;
};

/// Dispatches the problem's method (small, the subspace variants or the
/// oracle) and collects the report. Solver exceptions become status "error".
RunReport run_problem(const Problem& problem, const RunOptions& opts = {});

}  // namespace distopt
