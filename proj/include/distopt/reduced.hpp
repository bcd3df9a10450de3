#pragma once

#include "distopt/matmodel.hpp"
#include "distopt/stability.hpp"

namespace distopt {

/// Compressed form of A^V(x) − zV: the singular values of [R_A − zI; R_B]
/// equal those of A^V(x) − zV for every z.
struct ReducedRect {
  CMatrix r_a;  // ℓ×ℓ, VᴴA^V
  CMatrix r_b;  // ℓ×ℓ, R factor of the part of A^V orthogonal to V
};

/// Coefficient products AⱼV for a fixed basis, so A^V(x) costs κ axpys.
class ProjectedFamily {
 public:
  ProjectedFamily(const ParamMatrixFun& fun, CMatrix v);

  const ParamMatrixFun& fun() const { return *fun_; }
  const CMatrix& basis() const { return v_; }
  int ell() const { return static_cast<int>(v_.cols()); }
  const CMatrix& coeff_times_basis(int j) const { return av_.at(static_cast<std::size_t>(j)); }
  double coeff_times_basis_norm(int j) const { return norms_.at(static_cast<std::size_t>(j)); }
  const std::vector<double>& coeff_times_basis_norms() const { return norms_; }

  CMatrix eval(const RVector& x) const;

 private:
  const ParamMatrixFun* fun_;
  CMatrix v_;
  std::vector<CMatrix> av_;
  std::vector<double> norms_;
};

ReducedRect reduce_qr(const CMatrix& av, const CMatrix& v);
ReducedRect reduce_qr(const ParamMatrixFun& fun, const RVector& x, const CMatrix& v);

struct ReducedDist {
  double value = 0.0;
  cplx z_star;
  /// u is the n-vector left singular vector of A^V(x) − z*V, v the ℓ-vector ϑ.
  SingularTriplet triplet;
  /// V·ϑ.
  CVector lifted_v;
  bool certified = true;
  long evaluations = 0;
};

struct ReducedOptions {
  long max_evaluations = 400000;
  int bfgs_max_iter = 100;
  double bfgs_grad_tol = 1e-10;
};

/// min over Re z ≥ 0 of σ_min(A^V(x) − zV), certified to tol.
ReducedDist dist_reduced_cplus(const ProjectedFamily& pf, const RVector& x, double tol,
                               const ReducedOptions& opts = {});
ReducedDist dist_reduced_cplus(const ParamMatrixFun& fun, const RVector& x, const CMatrix& v,
                               double tol);

/// min over ω ∈ ℝ of σ_min(A^V(x) − iωV), certified to tol.
ReducedDist dist_reduced_imag(const ProjectedFamily& pf, const RVector& x, double tol,
                              const ReducedOptions& opts = {});
ReducedDist dist_reduced_imag(const ParamMatrixFun& fun, const RVector& x, const CMatrix& v,
                              double tol);

struct ReducedGradient {
  RVector grad;
  /// False when the smallest singular value is within 1e−8 (relative) of the next.
  bool smooth = true;
};

/// ∂/∂x_s of the reduced distance: Re(uᴴ (Σⱼ (∇fⱼ)_s AⱼV) ϑ).
ReducedGradient grad_dist_reduced(const ProjectedFamily& pf, const RVector& x, const ReducedDist& rd);
ReducedGradient grad_dist_reduced(const ParamMatrixFun& fun, const RVector& x, const CMatrix& v,
                                  const ReducedDist& rd);

/// Curvature bound of the reduced affine problem: the block matrix of
/// gamma_affine built from BⱼV.
double gamma_reduced_affine(const ParamMatrixFun& fun, const CMatrix& v);

}  // namespace distopt
