#include "distopt/smallmax.hpp"

#include <cmath>

namespace distopt {

SquaredObjective objective_sq_full(const ParamMatrixFun& fun, const RVector& x, double dist_tol,
                                   bool exploit_real) {
  SquaredObjective out;
  out.dist = distance_to_instability(fun.eval_full(x), dist_tol, exploit_real);
  out.grad = RVector::Zero(fun.dim_d());
  if (!out.dist.stable) return out;
  const double d = out.dist.dist;
  out.val = d * d;
  const CVector& u = out.dist.triplet.u;
  const CVector& v = out.dist.triplet.v;
  const RMatrix g = fun.weight_gradients(x);
  RVector re(fun.kappa());
  for (int j = 0; j < fun.kappa(); ++j) re(j) = u.dot(fun.coeff(j) * v).real();
  out.grad = 2.0 * d * (g * re);
  return out;
}

double resolve_gamma(const ParamMatrixFun& fun, const Box& box, const SmallMaxConfig& cfg) {
  double g = 0.0;
  if (cfg.gamma) g = *cfg.gamma;
  else if (fun.is_affine()) g = gamma_affine(fun);
  else g = gamma_general(fun, box, cfg.gamma_grid_per_dim);
  g *= cfg.gamma_multiplier;
  // a constant family has zero curvature; any positive γ is still valid
  return g > 0.0 ? g : 1e-12;
}

SmallMaxResult maximize_small(const ParamMatrixFun& fun, const Box& box, const SmallMaxConfig& cfg) {
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("maximize_small: tol must be positive");
  if (box.dim() != fun.dim_d()) throw std::invalid_argument("maximize_small: box dimension mismatch");
  SmallMaxResult res;
  res.gamma = resolve_gamma(fun, box, cfg);
  const bool exploit_real = cfg.restrict_omega_nonneg;
  const Objective obj = [&](const RVector& x) {
    const SquaredObjective so = objective_sq_full(fun, x, cfg.dist_tol, exploit_real);
    return ObjectiveValue{so.val, so.grad};
  };
  res.opt = optimize(obj, box, res.gamma, cfg.tol, cfg.max_iter);
  res.x_best = res.opt.x_best;
  res.dist_best = std::sqrt(std::max(0.0, res.opt.f_best));
  res.dist_upper = std::sqrt(std::max(0.0, res.opt.model_max));
  return res;
}

}  // namespace distopt
