#include "fixtures.hpp"

#include <cmath>
#include <limits>

#include "distopt/stability.hpp"

namespace fixtures {

CMatrix example4_a() {
  RMatrix a(4, 4);
  a << 0.1377, 0.3188, 3.5784, 0.7254,  //
      1.8339, -1.7077, 2.7694, -0.0631,  //
      -2.2588, -0.4336, -1.7499, 0.7147,  //
      0.8622, 0.3426, 3.0349, -0.6050;
  return a.cast<cplx>();
}

CMatrix example4_b() {
  RMatrix b(4, 2);
  b << -0.1241, 0.4889,  //
      1.4897, 1.0347,  //
      1.4090, 0.7269,  //
      1.4172, -0.3034;
  return b.cast<cplx>();
}

CMatrix example4_c() {
  RMatrix c(2, 4);
  c << 0.6715, -1.2075, 0.7172, 1.6302,  //
      0.2939, -0.7873, 0.8884, -1.1471;
  return c.cast<cplx>();
}

ParamMatrixFun example4_family(int d) {
  std::vector<GainSlot> slots;
  for (int j = 0; j < d; ++j) slots.push_back({j, j, 0.0});
  return feedback_family(example4_a(), example4_b(), example4_c(), slots);
}

Box example4_box(int d) { return cube(d, -5.0, 5.0); }

RMatrix Rng::real(Eigen::Index rows, Eigen::Index cols) {
  RMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal();
  return m;
}

CMatrix Rng::complex(Eigen::Index rows, Eigen::Index cols) {
  CMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = normal();
      m(i, j) = cplx(re, normal());
    }
  return m;
}

RVector Rng::vec(Eigen::Index n) { return real(n, 1).col(0); }

CMatrix random_stable(int n, std::uint64_t seed, bool complex, double margin) {
  Rng rng(seed);
  CMatrix m = complex ? rng.complex(n, n) : CMatrix(rng.real(n, n).cast<cplx>());
  m /= std::sqrt(static_cast<double>(n));
  const double alpha = spectral_abscissa_value(m);
  m -= cplx(alpha + margin, 0.0) * CMatrix::Identity(n, n);
  return m;
}

CMatrix random_orthonormal(int n, int ell, std::uint64_t seed) {
  Rng rng(seed);
  const CMatrix g = rng.complex(n, ell);
  Eigen::HouseholderQR<CMatrix> qr(g);
  return qr.householderQ() * CMatrix::Identity(n, ell);
}

ParamMatrixFun random_feedback(int n, int d, std::uint64_t seed, double margin, double scale, double shift) {
  const CMatrix a = random_stable(n, seed, false, margin);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  RMatrix b = rng.real(n, d);
  RMatrix c = rng.real(d, n);
  std::vector<GainSlot> slots;
  for (int j = 0; j < d; ++j) {
    b.col(j) *= scale / b.col(j).norm();
    c.row(j) *= scale / c.row(j).norm();
    slots.push_back({j, j, shift});
  }
  return feedback_family(a, b.cast<cplx>(), c.cast<cplx>(), slots);
}

ParamMatrixFun random_affine(int n, int d, std::uint64_t seed) {
  Rng rng(seed);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  CMatrix b0 = (s * rng.real(n, n)).cast<cplx>();
  std::vector<CMatrix> slopes;
  for (int j = 0; j < d; ++j) slopes.push_back((s * rng.real(n, n)).cast<cplx>());
  return ParamMatrixFun::affine(b0, slopes);
}

Box cube(int d, double lo, double hi) { return Box(RVector::Constant(d, lo), RVector::Constant(d, hi)); }

double dense_grid_min_sigma(const CMatrix& m, double bound, int points) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    const double w = -bound + 2.0 * bound * i / (points - 1);
    best = std::min(best, sigma_min_imag(m, w));
  }
  return best;
}

}  // namespace fixtures
