#pragma once

#include <optional>
#include <string>
#include <vector>

#include "distopt/eigopt.hpp"
#include "distopt/matmodel.hpp"
#include "distopt/reduced.hpp"

namespace distopt {

/// Orthonormal basis V (n×ℓ) of the current projection space.
struct SubspaceState {
  CMatrix v;
  int ell() const { return static_cast<int>(v.cols()); }
};

struct ExpandResult {
  SubspaceState state;
  bool dropped = false;
};

/// Appends v to the basis by Gram–Schmidt with one reorthogonalization pass.
/// The vector is dropped when its residual is at most drop_tol·‖v‖.
ExpandResult expand_basis(const SubspaceState& state, const CVector& v, double drop_tol);

enum class Variant { basic, extended, uniform };
enum class RunStatus { converged, max_iter, stagnated, stagnated_unstable, error };

std::string to_string(Variant v);
std::string to_string(RunStatus s);
std::optional<Variant> parse_variant(const std::string& s);

struct SubspaceConfig {
  double tol_gap = 1e-8;
  int max_iter = 50;
  /// Tolerance of the reduced maximization, on the squared distance.
  double inner_tol = 1e-10;
  /// Iteration cap of one reduced maximization.
  int inner_max_iter = 5000;
  /// Certification tolerance of each reduced distance evaluation.
  double reduced_dist_tol = 1e-11;
  double full_dist_tol = 1e-11;
  double drop_tol = 1e-10;
  Variant variant = Variant::basic;
  std::optional<double> gamma;
  double gamma_multiplier = 1.0;
  int gamma_grid_per_dim = 21;
  /// Re-evaluate the reduced distance at every interpolation point after
  /// each expansion and record the largest mismatch.
  bool verify_interpolation = false;
  /// Worker threads for the extended stencil.
  int threads = 1;
};

struct TraceRow {
  int iter = 0;
  RVector x;
  cplx z;  // argmin of the reduced problem at x
  double reduced_val = 0.0;
  double full_val = 0.0;
  bool stable = false;
  int basis_dim = 0;  // ℓ used for the reduced problem
  double gamma_used = 0.0;
  double gap = 0.0;
  /// sqrt of the reduced model maximum; bounds the reduced maximum from above.
  double reduced_upper = 0.0;
  int inner_iterations = 0;
  int full_evaluations = 0;
  int dropped = 0;
  double interp_max_dev = 0.0;
  double reduced_seconds = 0.0;
  double full_seconds = 0.0;
};

struct RunTrace {
  Variant variant = Variant::basic;
  std::vector<TraceRow> rows;
  RunStatus status = RunStatus::max_iter;
  std::string message;
  RVector x_best;
  double d_best = 0.0;
  /// Final reduced optimum; max D over the box lies in [d_best, d_upper].
  double d_upper = 0.0;
  double gap = 0.0;
  /// Every point whose vector entered the basis, in order of inclusion.
  std::vector<RVector> interpolation_points;
  CMatrix basis;
  /// False when some reduced maximization or evaluation was not certified.
  bool certified = true;
  double reduced_seconds = 0.0;
  double full_seconds = 0.0;
  int full_evaluations = 0;
};

RunTrace run_basic(const ParamMatrixFun& fun, const Box& box, const SubspaceConfig& cfg);
RunTrace run_extended(const ParamMatrixFun& fun, const Box& box, const SubspaceConfig& cfg);
RunTrace run_uniform(const ParamMatrixFun& fun, const Box& box, const SubspaceConfig& cfg);
/// Dispatches on cfg.variant.
RunTrace run_subspace(const ParamMatrixFun& fun, const Box& box, const SubspaceConfig& cfg);

/// Reduced distance used by the given variant: over Re z ≥ 0 for basic and
/// extended, over the imaginary axis for uniform.
ReducedDist reduced_distance(const ProjectedFamily& pf, const RVector& x, Variant variant,
                             double tol);

}  // namespace distopt
