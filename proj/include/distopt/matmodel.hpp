#pragma once

#include <functional>
#include <vector>

#include "distopt/linalg.hpp"

namespace distopt {

/// A real scalar function of the parameters with its first (and optionally
/// second) derivatives. An empty `hessian` means second derivatives are not
/// available.
struct ScalarFunction {
  std::function<double(const RVector&)> value;
  std::function<RVector(const RVector&)> gradient;
  std::function<RMatrix(const RVector&)> hessian;

  bool has_hessian() const { return static_cast<bool>(hessian); }

  static ScalarFunction constant(double c, int d);
  /// x ↦ x[j]
  static ScalarFunction coordinate(int j, int d);
  /// x ↦ offset + weightsᵀx
  static ScalarFunction affine(double offset, RVector weights);
};

/// Axis-aligned feasible box, lower ≤ upper componentwise with finite bounds.
class Box {
 public:
  Box() = default;
  Box(RVector lower, RVector upper);

  int dim() const { return static_cast<int>(lower_.size()); }
  const RVector& lower() const { return lower_; }
  const RVector& upper() const { return upper_; }
  RVector midpoint() const { return 0.5 * (lower_ + upper_); }
  RVector width() const { return upper_ - lower_; }
  bool contains(const RVector& x, double slack = 0.0) const;
  RVector clamp(const RVector& x) const;

 private:
  RVector lower_;
  RVector upper_;
};

/// A(x) = Σⱼ fⱼ(x)·Aⱼ with square complex coefficients of a common order n.
/// Immutable after construction; coefficient 2-norms are cached.
class ParamMatrixFun {
 public:
  ParamMatrixFun(std::vector<CMatrix> coeffs, std::vector<ScalarFunction> funcs, int dim_d);

  /// A(x) = B₀ + Σⱼ xⱼBⱼ; sets the affine flag.
  static ParamMatrixFun affine(CMatrix b0, std::vector<CMatrix> slopes);

  int kappa() const { return static_cast<int>(coeffs_.size()); }
  int dim_n() const { return n_; }
  int dim_d() const { return d_; }
  bool is_affine() const { return affine_; }
  /// True when every coefficient matrix is real.
  bool real_valued() const { return all_real_; }
  bool coeff_is_real(int j) const { return real_flags_.at(static_cast<std::size_t>(j)); }
  bool has_hessians() const;

  const CMatrix& coeff(int j) const { return coeffs_.at(static_cast<std::size_t>(j)); }
  const ScalarFunction& func(int j) const { return funcs_.at(static_cast<std::size_t>(j)); }
  double coeff_norm(int j) const { return norms_.at(static_cast<std::size_t>(j)); }
  const std::vector<CMatrix>& coeffs() const { return coeffs_; }

  /// fⱼ(x) for every term.
  RVector weights(const RVector& x) const;
  /// Row s holds (∇fⱼ(x))_s for every term j.
  RMatrix weight_gradients(const RVector& x) const;

  CMatrix eval_full(const RVector& x) const;
  /// ∂A/∂x_s (0-based s).
  CMatrix eval_deriv(const RVector& x, int s) const;
  /// A(x)·V for an orthonormal V.
  CMatrix eval_reduced(const RVector& x, const CMatrix& v) const;

  /// For affine families: the slopes B₁..B_d.
  std::vector<CMatrix> slopes() const;

 private:
  void check_point(const RVector& x) const;

  std::vector<CMatrix> coeffs_;
  std::vector<ScalarFunction> funcs_;
  std::vector<double> norms_;
  std::vector<bool> real_flags_;
  int n_ = 0;
  int d_ = 0;
  bool affine_ = false;
  bool all_real_ = true;
};

/// Largest eigenvalue of the d·n × d·n block matrix with blocks
/// Bₚᴴ B_q + B_qᴴ Bₚ, built from the given (possibly rectangular) slopes.
double gamma_from_slopes(const std::vector<CMatrix>& slopes);

/// Exact curvature bound for affine families.
double gamma_affine(const ParamMatrixFun& fun);

/// Grid estimate of max 2g₁(x)² + 6g₀(x)g₂(x) over the box, inflated by
/// kGammaSafety. Requires Hessians.
double gamma_general(const ParamMatrixFun& fun, const Box& box, int grid_per_dim);

/// Same bound, but with caller-supplied coefficient norms (used for projected
/// families where ‖AⱼV‖ replaces ‖Aⱼ‖).
double gamma_general(const ParamMatrixFun& fun, const std::vector<double>& coeff_norms,
                     const Box& box, int grid_per_dim);

inline constexpr double kGammaSafety = 1.1;

/// Visits every point of a uniform tensor grid with `per_dim` points per
/// coordinate (endpoints included; the midpoint when per_dim == 1).
void for_each_grid_point(const Box& box, int per_dim, const std::function<void(const RVector&)>& fn);

}  // namespace distopt
