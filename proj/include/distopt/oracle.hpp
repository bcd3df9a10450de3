#pragma once

#include "distopt/matmodel.hpp"

namespace distopt {

/// Result of a brute-force branch-and-bound sweep. For minimizations `upper`
/// is the incumbent and `lower` a certified lower bound; for maximizations
/// `value` is the best observed value and `upper` a certified upper bound.
struct GridCertificate {
  double value = 0.0;
  RVector point;  // ω (1-D), (Re z, Im z) (2-D) or the maximizing x
  double lower = 0.0;
  double upper = 0.0;
  double radius = 0.0;  // half-width of the finest cell examined
  double lipschitz_const = 1.0;
  long evaluations = 0;
  bool certified = true;  // false if the evaluation budget ran out

  double error() const { return upper - lower; }
};

/// min over |ω| ≤ 2‖M‖₂ of σ_min(M − iωI), certified to tol.
GridCertificate certified_min_sigma_imagaxis(const CMatrix& m, double tol);

/// min over 0 ≤ Re z ≤ bound, |Im z| ≤ bound of σ_min(AV − zV), certified to
/// tol. V must have orthonormal columns; bound ≥ 2‖AV‖₂.
GridCertificate certified_min_sigma_cplus(const CMatrix& av, const CMatrix& v, double bound,
                                          double tol);

struct BruteMaxOptions {
  int steps_per_dim = 41;
  /// x-resolution of the final zoom around the best point.
  double tol = 1e-6;
  /// Branch-and-bound refinement stops below this value gap.
  double value_tol = 1e-6;
  long max_evaluations = 20000;
  int max_n = 100;
};

/// Grid maximization of D(A(x)) over the box (d ≤ 2). `value` is attained at
/// `point`; `upper` follows from the Lipschitz constant ζ = Σⱼ Lⱼ‖Aⱼ‖₂ with
/// Lⱼ the grid-estimated Lipschitz constant of fⱼ.
GridCertificate brute_max_distance(const ParamMatrixFun& fun, const Box& box,
                                   const BruteMaxOptions& opts = {});

/// ζ as used by brute_max_distance.
double distance_lipschitz_constant(const ParamMatrixFun& fun, const Box& box, int grid_per_dim);

}  // namespace distopt
