#pragma once

#include <optional>
#include <string>
#include <vector>

#include "distopt/linalg.hpp"

namespace distopt {

inline constexpr const char* kReportSchema = "distopt-report/1";

struct ReportRow {
  int iter = 0;
  int basis_dim = 0;
  RVector x;
  std::optional<double> x_error;  // ‖x − x*‖ when an oracle maximizer is known
  std::optional<cplx> z;
  double gamma = 0.0;
  double reduced_val = 0.0;  // upper bound of the current model at x
  double full_val = 0.0;
  double gap = 0.0;
  bool stable = false;
  int full_evaluations = 0;
  double reduced_seconds = 0.0;
  double full_seconds = 0.0;
};

struct OracleSummary {
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  RVector point;
  bool certified = false;
  long evaluations = 0;
  /// Differences of the run against the oracle (absent for method oracle).
  std::optional<double> x_error;
  std::optional<double> value_error;
};

struct RunReport {
  std::string method;
  /// converged | max_iter | stagnated | stagnated-unstable | error
  std::string status;
  std::string message;
  RVector x_best;
  double d_best = 0.0;
  double d_upper = 0.0;
  double gap = 0.0;
  int iterations = 0;
  int basis_dim = 0;
  double gamma = 0.0;
  bool certified = false;
  std::vector<ReportRow> rows;
  std::optional<OracleSummary> oracle;
  double reduced_seconds = 0.0;
  double full_seconds = 0.0;
  double total_seconds = 0.0;

  /// 0 converged, 1 error, 2 otherwise.
  int exit_code() const;
};

/// Shortest decimal with 12 significant digits, as used in every output.
std::string format12(double v);
/// v rounded to 12 significant digits.
double round12(double v);

/// Column names of trace.csv for a d-parameter problem.
std::vector<std::string> trace_columns(int d);

std::string trace_csv(const RunReport& r);
/// report.json text; `include_timings` false gives a run-independent text.
std::string report_json(const RunReport& r, bool include_timings = true);

/// Writes report.json and trace.csv into dir, creating it if needed.
void write_report(const RunReport& r, const std::string& dir);

/// JSON error object for failures before a run could start.
std::string error_json(const std::string& message);

}  // namespace distopt
