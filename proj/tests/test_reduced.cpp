#include <doctest.h>

#include <cmath>

#include "distopt/oracle.hpp"
#include "distopt/reduced.hpp"
#include "distopt/subspace.hpp"
#include "fixtures.hpp"

using namespace distopt;

namespace {

RVector scalar(double v) { return RVector::Constant(1, v); }

ParamMatrixFun constant_family(const CMatrix& a, int d = 1) {
  return ParamMatrixFun({a}, {ScalarFunction::constant(1.0, d)}, d);
}

double stacked_sigma(const ReducedRect& r, cplx z) {
  const auto ell = r.r_a.rows();
  CMatrix s(2 * ell, ell);
  s.topRows(ell) = r.r_a - z * CMatrix::Identity(ell, ell);
  s.bottomRows(ell) = r.r_b;
  return sigma_min(s);
}

// A = Q T Qᴴ with T block upper triangular, so the first ell columns of Q span
// an invariant subspace with restriction T₁₁.
struct InvariantCase {
  CMatrix a, v, s;
};

InvariantCase invariant_case(int n, int ell, std::uint64_t seed) {
  fixtures::Rng rng(seed);
  CMatrix t = rng.complex(n, n) / std::sqrt(static_cast<double>(n));
  t.bottomLeftCorner(n - ell, ell).setZero();
  t.diagonal().array() -= 1.5;
  const CMatrix q = fixtures::random_orthonormal(n, n, seed + 1);
  return {q * t * q.adjoint(), q.leftCols(ell), t.topLeftCorner(ell, ell)};
}

}  // namespace

TEST_CASE("reduce_qr on an orthogonal complement and on an invariant subspace") {
  const int n = 7, ell = 3;
  const CMatrix q = fixtures::random_orthonormal(n, n, 2);
  const CMatrix v = q.leftCols(ell);
  fixtures::Rng rng(3);
  const CMatrix av_perp = q.rightCols(n - ell) * rng.complex(n - ell, ell);
  const ReducedRect r1 = reduce_qr(av_perp, v);
  CHECK(r1.r_a.norm() < 1e-13);
  for (int j = 0; j < ell; ++j) CHECK(r1.r_b.col(j).norm() == doctest::Approx(av_perp.col(j).norm()).epsilon(1e-12));
  CHECK(r1.r_b.triangularView<Eigen::StrictlyLower>().toDenseMatrix().norm() < 1e-13);

  const CMatrix s = rng.complex(ell, ell);
  const ReducedRect r2 = reduce_qr(v * s, v);
  CHECK((r2.r_a - s).norm() < 1e-13);
  CHECK(r2.r_b.norm() < 1e-13);
}

TEST_CASE("the compressed form keeps the singular values of A^V − zV") {
  const ParamMatrixFun fun = fixtures::random_affine(15, 1, 4);
  const CMatrix v = fixtures::random_orthonormal(15, 4, 5);
  const RVector x = scalar(0.3);
  const ReducedRect r = reduce_qr(fun, x, v);
  const CMatrix av = fun.eval_reduced(x, v);
  fixtures::Rng rng(6);
  for (int k = 0; k < 20; ++k) {
    const cplx z(rng.uniform(0, 3), rng.uniform(-3, 3));
    CHECK(std::abs(stacked_sigma(r, z) - sigma_min(av - z * v)) <= 1e-12);
  }
}

TEST_CASE("full-space reduction equals the distance to instability") {
  const CMatrix a = fixtures::random_stable(9, 7, false);
  const ParamMatrixFun fun = constant_family(a);
  const CMatrix eye = CMatrix::Identity(9, 9);
  const DistResult d = distance_to_instability(a, 1e-12);
  const ReducedDist rc = dist_reduced_cplus(fun, scalar(0.0), eye, 1e-10);
  CHECK(std::abs(rc.value - d.dist) <= 1e-9);
  CHECK(std::abs(rc.z_star.real()) <= 1e-6);
  CHECK(rc.certified);
  const ReducedDist ri = dist_reduced_imag(fun, scalar(0.0), eye, 1e-10);
  CHECK(std::abs(ri.value - d.dist) <= 1e-9);
  CHECK(ri.z_star.real() == 0.0);
  CHECK(std::abs(std::abs(ri.z_star.imag()) - d.z_star.imag()) <= 1e-5);
}

TEST_CASE("a one-dimensional invariant subspace of an unstable eigenvalue gives zero") {
  const int n = 6;
  const CMatrix q = fixtures::random_orthonormal(n, n, 8);
  CMatrix t = 0.3 * fixtures::Rng(9).complex(n, n);
  t = t.triangularView<Eigen::Upper>().toDenseMatrix();
  t(0, 0) = 0.7;
  const CMatrix a = q * t * q.adjoint();
  const CMatrix v = q.leftCols(1);
  const ReducedDist rd = dist_reduced_cplus(constant_family(a), scalar(0.0), v, 1e-10);
  CHECK(rd.value <= 1e-9);
  CHECK(std::abs(rd.z_star - cplx(0.7, 0.0)) <= 1e-6);
}

TEST_CASE("C⁺ reduced distance matches the 2-D certified oracle") {
  for (std::uint64_t seed : {10, 11, 12}) {
    const ParamMatrixFun fun = fixtures::random_affine(12, 1, seed);
    const CMatrix v = fixtures::random_orthonormal(12, 3, seed + 50);
    const RVector x = scalar(0.2);
    const CMatrix av = fun.eval_reduced(x, v);
    const ReducedDist rd = dist_reduced_cplus(fun, x, v, 1e-10);
    const GridCertificate g = certified_min_sigma_cplus(av, v, 2.0 * spectral_norm(av), 1e-8);
    CHECK(std::abs(rd.value - g.value) <= 1e-6);
    CHECK(rd.certified);
    CHECK(rd.z_star.real() >= 0.0);
  }
}

TEST_CASE("imaginary-axis reduced distance on an invariant subspace") {
  const InvariantCase ic = invariant_case(10, 3, 20);
  const ReducedDist rd = dist_reduced_imag(constant_family(ic.a), scalar(0.0), ic.v, 1e-10);
  const double bound = 2.0 * spectral_norm(ic.s) + 1.0;
  const double grid = fixtures::dense_grid_min_sigma(ic.s, bound, 200001);
  CHECK(rd.value <= grid + 1e-12);
  CHECK(rd.value >= grid - 1e-6);
  CHECK(std::abs(rd.value - distance_to_instability(ic.s, 1e-12).dist) <= 1e-9);
}

TEST_CASE("reduced value identities: triplet, region bound, Lipschitz") {
  const ParamMatrixFun fun = fixtures::random_affine(14, 1, 30);
  fixtures::Rng rng(31);
  for (int ell : {1, 2, 4}) {
    const CMatrix v = fixtures::random_orthonormal(14, ell, 32 + static_cast<std::uint64_t>(ell));
    const RVector x = scalar(rng.uniform(-1, 1));
    const CMatrix av = fun.eval_reduced(x, v);
    const ReducedDist rd = dist_reduced_cplus(fun, x, v, 1e-10);
    const CMatrix m = av - rd.z_star * v;
    CHECK(std::abs(rd.value - sigma_min(m)) <= 1e-10);
    CHECK(std::abs(rd.z_star) <= 2.0 * spectral_norm(av) + 1e-12);
    // (u, Vϑ) is a consistent pair of the n×ℓ matrix.
    CHECK((m * rd.triplet.v - rd.value * rd.triplet.u).norm() <= 1e-10);
    CHECK((rd.triplet.u.adjoint() * m - rd.value * rd.triplet.v.adjoint()).norm() <= 1e-10);
    CHECK((v * rd.triplet.v - rd.lifted_v).norm() <= 1e-14);
    for (int k = 0; k < 50; ++k) {
      const cplx z1(rng.uniform(0, 3), rng.uniform(-3, 3)), z2(rng.uniform(0, 3), rng.uniform(-3, 3));
      CHECK(std::abs(sigma_min(av - z1 * v) - sigma_min(av - z2 * v)) <= std::abs(z1 - z2) + 1e-12);
    }
  }
}

TEST_CASE("monotonicity on nested subspaces") {
  const ParamMatrixFun fun = fixtures::random_feedback(16, 1, 40, 0.3);
  const CMatrix w = fixtures::random_orthonormal(16, 6, 41);
  const CMatrix v = w.leftCols(3);
  fixtures::Rng rng(42);
  for (int k = 0; k < 5; ++k) {
    const RVector x = scalar(rng.uniform(-1, 1));
    const CMatrix a = fun.eval_full(x);
    for (int p = 0; p < 20; ++p) {
      const cplx z(rng.uniform(0, 2), rng.uniform(-4, 4));
      const double full = sigma_min(a - z * CMatrix::Identity(16, 16));
      const double big = sigma_min(a * w - z * w);
      const double small = sigma_min(a * v - z * v);
      CHECK(full <= big + 1e-12);
      CHECK(big <= small + 1e-12);
    }
    const double d = distance_to_instability(a, 1e-12).dist;
    const double dw = dist_reduced_cplus(fun, x, w, 1e-11).value;
    const double dv = dist_reduced_cplus(fun, x, v, 1e-11).value;
    CHECK(d <= dw + 1e-9);
    CHECK(dw <= dv + 1e-9);
  }
}

TEST_CASE("interpolation after including the singular vector or eigenvector") {
  const ParamMatrixFun fun = fixtures::random_feedback(12, 1, 50, 0.2, 1.5);
  const CMatrix v0 = fixtures::random_orthonormal(12, 2, 51);
  int stable_seen = 0, unstable_seen = 0;
  for (double xv : {-3.0, -1.0, 0.0, 1.0, 3.0}) {
    const RVector x = scalar(xv);
    const DistResult d = distance_to_instability(fun.eval_full(x), 1e-12);
    const CVector add = d.stable ? d.triplet.v : d.eigvec;
    const ExpandResult ex = expand_basis({v0}, add, 1e-10);
    const ReducedDist rd = dist_reduced_cplus(fun, x, ex.state.v, 1e-11);
    CHECK(std::abs(rd.value - d.dist) <= 1e-8);
    if (d.stable) {
      ++stable_seen;
      CHECK(std::abs(rd.z_star.real()) <= 1e-6);
    } else {
      ++unstable_seen;
    }
  }
  CHECK(stable_seen > 0);
  CHECK(unstable_seen > 0);
}

TEST_CASE("reduced gradient: constant family and finite differences") {
  const CMatrix a = fixtures::random_stable(8, 60, false);
  const CMatrix v = fixtures::random_orthonormal(8, 3, 61);
  const ParamMatrixFun c = constant_family(a, 2);
  const ReducedDist rc = dist_reduced_cplus(c, RVector::Zero(2), v, 1e-10);
  CHECK(grad_dist_reduced(c, RVector::Zero(2), v, rc).grad.norm() == 0.0);

  const ParamMatrixFun fun = fixtures::random_feedback(10, 2, 62, 0.4);
  const CMatrix w = fixtures::random_orthonormal(10, 4, 63);
  fixtures::Rng rng(64);
  int checked = 0;
  for (int trial = 0; trial < 6; ++trial) {
    const RVector x = RVector::NullaryExpr(2, [&] { return rng.uniform(-0.5, 0.5); });
    for (bool imag : {false, true}) {
      const auto eval = [&](const RVector& p) {
        return imag ? dist_reduced_imag(fun, p, w, 1e-13) : dist_reduced_cplus(fun, p, w, 1e-13);
      };
      const ReducedDist rd = eval(x);
      const ReducedGradient g = grad_dist_reduced(fun, x, w, rd);
      if (!g.smooth) continue;
      for (int s = 0; s < 2; ++s) {
        const double h = 1e-6;
        const RVector e = RVector::Unit(2, s);
        const double fd = (eval(x + h * e).value - eval(x - h * e).value) / (2.0 * h);
        CHECK(std::abs(fd - g.grad(s)) <= 1e-5 * std::max(1.0, std::abs(g.grad(s))));
      }
      ++checked;
    }
  }
  CHECK(checked >= 6);
}

TEST_CASE("gamma_reduced_affine") {
  const ParamMatrixFun fun = fixtures::random_affine(7, 2, 70);
  CHECK(gamma_reduced_affine(fun, CMatrix::Identity(7, 7)) == doctest::Approx(gamma_affine(fun)).epsilon(1e-12));

  fixtures::Rng rng(71);
  const RVector b = rng.vec(9), c = rng.vec(9);
  const ParamMatrixFun r1 = ParamMatrixFun::affine(CMatrix::Zero(9, 9), {(b * c.transpose()).cast<cplx>()});
  for (int ell : {1, 3, 5}) {
    const CMatrix v = fixtures::random_orthonormal(9, ell, 72 + static_cast<std::uint64_t>(ell));
    const double direct = 2.0 * b.squaredNorm() * (v.transpose() * c.cast<cplx>()).squaredNorm();
    const double g = gamma_reduced_affine(r1, v);
    CHECK(g == doctest::Approx(direct).epsilon(1e-10));
    CHECK(g <= gamma_affine(r1) + 1e-9);
  }

  const ParamMatrixFun sine({CMatrix::Identity(3, 3)},
                            {{.value = [](const RVector& x) { return std::sin(x(0)); },
                              .gradient = [](const RVector& x) { return RVector::Constant(1, std::cos(x(0))); },
                              .hessian = {}}},
                            1);
  CHECK_THROWS(gamma_reduced_affine(sine, CMatrix::Identity(3, 1)));
}

TEST_CASE("invalid tolerances are rejected") {
  const ParamMatrixFun fun = fixtures::random_affine(4, 1, 80);
  const CMatrix v = CMatrix::Identity(4, 2);
  CHECK_THROWS(dist_reduced_cplus(fun, scalar(0.0), v, 0.0));
  CHECK_THROWS(dist_reduced_imag(fun, scalar(0.0), v, -1.0));
}
