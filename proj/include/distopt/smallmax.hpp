#pragma once

#include <optional>

#include "distopt/eigopt.hpp"
#include "distopt/matmodel.hpp"
#include "distopt/stability.hpp"

namespace distopt {

struct SmallMaxConfig {
  /// Overrides the analytic curvature bound when set.
  std::optional<double> gamma;
  /// Scales whichever γ is used; values above 1 guard against the nonsmooth
  /// behaviour near points where stability is lost.
  double gamma_multiplier = 1.0;
  double tol = 1e-8;
  int max_iter = 200;
  bool restrict_omega_nonneg = true;
  double dist_tol = 1e-10;
  int gamma_grid_per_dim = 21;
};

struct SquaredObjective {
  double val = 0.0;
  RVector grad;
  DistResult dist;
};

/// [D(A(x))]² and its gradient 2D·Re(uᴴ ∂A/∂x_s v). Zero value and gradient
/// at unstable x.
SquaredObjective objective_sq_full(const ParamMatrixFun& fun, const RVector& x,
                                   double dist_tol = 1e-10, bool exploit_real = true);

struct SmallMaxResult {
  OptResult opt;  // over D²
  double gamma = 0.0;
  RVector x_best;
  double dist_best = 0.0;
  /// Upper bound on max D from the model: sqrt(max(model_max, 0)).
  double dist_upper = 0.0;
};

double resolve_gamma(const ParamMatrixFun& fun, const Box& box, const SmallMaxConfig& cfg);

/// Support-function maximization of D² over the box.
SmallMaxResult maximize_small(const ParamMatrixFun& fun, const Box& box, const SmallMaxConfig& cfg);

}  // namespace distopt
