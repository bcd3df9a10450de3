#include "distopt/matmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace distopt {

ScalarFunction ScalarFunction::constant(double c, int d) {
  return {.value = [c](const RVector&) { return c; },
          .gradient = [d](const RVector&) { return RVector::Zero(d); },
          .hessian = [d](const RVector&) { return RMatrix::Zero(d, d); }};
}

ScalarFunction ScalarFunction::coordinate(int j, int d) {
  if (j < 0 || j >= d) throw std::invalid_argument("coordinate function index out of range");
  return {.value = [j](const RVector& x) { return x(j); },
          .gradient = [j, d](const RVector&) { return RVector::Unit(d, j); },
          .hessian = [d](const RVector&) { return RMatrix::Zero(d, d); }};
}

ScalarFunction ScalarFunction::affine(double offset, RVector weights) {
  const int d = static_cast<int>(weights.size());
  return {.value = [offset, weights](const RVector& x) { return offset + weights.dot(x); },
          .gradient = [weights](const RVector&) { return weights; },
          .hessian = [d](const RVector&) { return RMatrix::Zero(d, d); }};
}

Box::Box(RVector lower, RVector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) throw std::invalid_argument("Box: bound dimensions differ");
  if (lower_.size() == 0) throw std::invalid_argument("Box: zero-dimensional box");
  for (Eigen::Index i = 0; i < lower_.size(); ++i) {
    if (!std::isfinite(lower_(i)) || !std::isfinite(upper_(i)))
      throw std::invalid_argument("Box: bounds must be finite");
    if (lower_(i) > upper_(i)) throw std::invalid_argument("Box: lower bound exceeds upper bound");
  }
}

bool Box::contains(const RVector& x, double slack) const {
  if (x.size() != lower_.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x(i) < lower_(i) - slack || x(i) > upper_(i) + slack) return false;
  return true;
}

RVector Box::clamp(const RVector& x) const { return x.cwiseMax(lower_).cwiseMin(upper_); }

ParamMatrixFun::ParamMatrixFun(std::vector<CMatrix> coeffs, std::vector<ScalarFunction> funcs,
                               int dim_d)
    : coeffs_(std::move(coeffs)), funcs_(std::move(funcs)), d_(dim_d) {
  if (coeffs_.empty()) throw std::invalid_argument("ParamMatrixFun: at least one term required");
  if (coeffs_.size() != funcs_.size())
    throw std::invalid_argument("ParamMatrixFun: coefficient and function counts differ");
  if (d_ < 1) throw std::invalid_argument("ParamMatrixFun: parameter count must be positive");
  n_ = static_cast<int>(coeffs_.front().rows());
  for (std::size_t j = 0; j < coeffs_.size(); ++j) {
    const CMatrix& a = coeffs_[j];
    if (a.rows() != n_ || a.cols() != n_)
      throw std::invalid_argument("ParamMatrixFun: coefficient " + std::to_string(j) +
                                  " is not " + std::to_string(n_) + "x" + std::to_string(n_));
    if (!funcs_[j].value || !funcs_[j].gradient)
      throw std::invalid_argument("ParamMatrixFun: function " + std::to_string(j) +
                                  " lacks value or gradient");
    norms_.push_back(spectral_norm(a));
    real_flags_.push_back(is_real(a));
    all_real_ = all_real_ && real_flags_.back();
  }
}

ParamMatrixFun ParamMatrixFun::affine(CMatrix b0, std::vector<CMatrix> slopes) {
  const int d = static_cast<int>(slopes.size());
  if (d < 1) throw std::invalid_argument("affine family needs at least one slope");
  std::vector<CMatrix> coeffs;
  coeffs.reserve(slopes.size() + 1);
  coeffs.push_back(std::move(b0));
  std::vector<ScalarFunction> funcs;
  funcs.push_back(ScalarFunction::constant(1.0, d));
  for (int j = 0; j < d; ++j) {
    coeffs.push_back(std::move(slopes[static_cast<std::size_t>(j)]));
    funcs.push_back(ScalarFunction::coordinate(j, d));
  }
  ParamMatrixFun fun(std::move(coeffs), std::move(funcs), d);
  fun.affine_ = true;
  return fun;
}

bool ParamMatrixFun::has_hessians() const {
  return std::all_of(funcs_.begin(), funcs_.end(),
                     [](const ScalarFunction& f) { return f.has_hessian(); });
}

void ParamMatrixFun::check_point(const RVector& x) const {
  if (x.size() != d_)
    throw std::invalid_argument("parameter vector has dimension " + std::to_string(x.size()) +
                                ", expected " + std::to_string(d_));
}

RVector ParamMatrixFun::weights(const RVector& x) const {
  check_point(x);
  RVector w(kappa());
  for (int j = 0; j < kappa(); ++j) w(j) = funcs_[static_cast<std::size_t>(j)].value(x);
  return w;
}

RMatrix ParamMatrixFun::weight_gradients(const RVector& x) const {
  check_point(x);
  RMatrix g(d_, kappa());
  for (int j = 0; j < kappa(); ++j) g.col(j) = funcs_[static_cast<std::size_t>(j)].gradient(x);
  return g;
}

CMatrix ParamMatrixFun::eval_full(const RVector& x) const {
  const RVector w = weights(x);
  CMatrix a = CMatrix::Zero(n_, n_);
  for (int j = 0; j < kappa(); ++j)
    if (w(j) != 0.0) a += w(j) * coeffs_[static_cast<std::size_t>(j)];
  return a;
}

CMatrix ParamMatrixFun::eval_deriv(const RVector& x, int s) const {
  if (s < 0 || s >= d_)
    throw std::out_of_range("derivative index " + std::to_string(s) + " outside [0, " +
                            std::to_string(d_) + ")");
  const RMatrix g = weight_gradients(x);
  CMatrix a = CMatrix::Zero(n_, n_);
  for (int j = 0; j < kappa(); ++j)
    if (g(s, j) != 0.0) a += g(s, j) * coeffs_[static_cast<std::size_t>(j)];
  return a;
}

CMatrix ParamMatrixFun::eval_reduced(const RVector& x, const CMatrix& v) const {
  if (v.rows() != n_) throw std::invalid_argument("eval_reduced: basis has wrong row count");
  if (gram_deviation(v) > 1e-8) throw std::invalid_argument("eval_reduced: basis is not orthonormal");
  const RVector w = weights(x);
  CMatrix av = CMatrix::Zero(n_, v.cols());
  for (int j = 0; j < kappa(); ++j)
    if (w(j) != 0.0) av.noalias() += w(j) * (coeffs_[static_cast<std::size_t>(j)] * v);
  return av;
}

std::vector<CMatrix> ParamMatrixFun::slopes() const {
  if (!affine_) throw std::logic_error("slopes() requires an affine family");
  return {coeffs_.begin() + 1, coeffs_.end()};
}

double gamma_from_slopes(const std::vector<CMatrix>& slopes) {
  if (slopes.empty()) return 0.0;
  const auto d = static_cast<Eigen::Index>(slopes.size());
  const Eigen::Index m = slopes.front().cols();
  if (d == 1) {
    const double s = spectral_norm(slopes.front());
    return 2.0 * s * s;
  }
  CMatrix k(d * m, d * m);
  for (Eigen::Index p = 0; p < d; ++p) {
    for (Eigen::Index q = p; q < d; ++q) {
      const CMatrix& bp = slopes[static_cast<std::size_t>(p)];
      const CMatrix& bq = slopes[static_cast<std::size_t>(q)];
      const CMatrix cross = bp.adjoint() * bq;
      const CMatrix block = cross + cross.adjoint();
      k.block(p * m, q * m, m, m) = block;
      if (p != q) k.block(q * m, p * m, m, m) = block.adjoint();
    }
  }
  return std::max(0.0, lambda_max_hermitian(k));
}

double gamma_affine(const ParamMatrixFun& fun) {
  if (!fun.is_affine())
    throw std::invalid_argument("gamma_affine requires an affine family; use gamma_general");
  return gamma_from_slopes(fun.slopes());
}

void for_each_grid_point(const Box& box, int per_dim, const std::function<void(const RVector&)>& fn) {
  if (per_dim < 1) throw std::invalid_argument("grid needs at least one point per dimension");
  const int d = box.dim();
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  RVector x(d);
  while (true) {
    for (int i = 0; i < d; ++i) {
      const double t = per_dim == 1 ? 0.5 : static_cast<double>(idx[static_cast<std::size_t>(i)]) / (per_dim - 1);
      x(i) = box.lower()(i) + t * (box.upper()(i) - box.lower()(i));
    }
    fn(x);
    int i = 0;
    while (i < d && ++idx[static_cast<std::size_t>(i)] == per_dim) idx[static_cast<std::size_t>(i++)] = 0;
    if (i == d) break;
  }
}

double gamma_general(const ParamMatrixFun& fun, const std::vector<double>& coeff_norms,
                     const Box& box, int grid_per_dim) {
  if (!fun.has_hessians())
    throw std::invalid_argument("gamma_general: every scalar function must supply a Hessian");
  if (static_cast<int>(coeff_norms.size()) != fun.kappa())
    throw std::invalid_argument("gamma_general: one norm per coefficient required");
  if (box.dim() != fun.dim_d()) throw std::invalid_argument("gamma_general: box dimension mismatch");
  double best = 0.0;
  for_each_grid_point(box, grid_per_dim, [&](const RVector& x) {
    double g0 = 0.0, g1 = 0.0, g2 = 0.0;
    for (int j = 0; j < fun.kappa(); ++j) {
      const ScalarFunction& f = fun.func(j);
      const double nrm = coeff_norms[static_cast<std::size_t>(j)];
      g0 += std::abs(f.value(x)) * nrm;
      g1 += f.gradient(x).norm() * nrm;
      const RMatrix h = f.hessian(x);
      // symmetric Hessian: 2-norm is the largest |eigenvalue|
      const double hn = h.size() == 0 ? 0.0 : Eigen::SelfAdjointEigenSolver<RMatrix>(h, Eigen::EigenvaluesOnly)
                                                  .eigenvalues()
                                                  .cwiseAbs()
                                                  .maxCoeff();
      g2 += hn * nrm;
    }
    best = std::max(best, 2.0 * g1 * g1 + 6.0 * g0 * g2);
  });
  return kGammaSafety * best;
}

double gamma_general(const ParamMatrixFun& fun, const Box& box, int grid_per_dim) {
  std::vector<double> norms;
  for (int j = 0; j < fun.kappa(); ++j) norms.push_back(fun.coeff_norm(j));
  return gamma_general(fun, norms, box, grid_per_dim);
}

}  // namespace distopt
