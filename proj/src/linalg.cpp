#include "distopt/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <string>

namespace distopt {

RVector singular_values(const CMatrix& m) {
  if (m.size() == 0) return RVector();
  Eigen::BDCSVD<CMatrix> svd(m);
  return svd.singularValues();
}

double spectral_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return singular_values(m)(0);
}

double sigma_min(const CMatrix& m) {
  if (m.rows() < m.cols()) throw std::invalid_argument("sigma_min: expected rows >= cols");
  if (m.size() == 0) return 0.0;
  const RVector s = singular_values(m);
  return s(s.size() - 1);
}

double gram_deviation(const CMatrix& v) {
  const CMatrix g = v.adjoint() * v - CMatrix::Identity(v.cols(), v.cols());
  return g.size() == 0 ? 0.0 : g.cwiseAbs().maxCoeff();
}

bool is_real(const CMatrix& m) { return m.imag().isZero(0.0); }

std::vector<cplx> eigenvalues(const CMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("eigenvalues: matrix must be square");
  const lapack_int n = static_cast<lapack_int>(m.rows());
  if (n == 0) return {};
  CMatrix work = m;
  std::vector<cplx> w(static_cast<std::size_t>(n));
  const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, work.data(), n, w.data(),
                                        nullptr, 1, nullptr, 1);
  if (info != 0) throw LinalgError("zgeev failed with info=" + std::to_string(info));
  return w;
}

// Eigen's real Schur solver: the dgeev of the OpenBLAS 0.3.20 LAPACK shipped
// with some distributions returns wrong eigenvalues for n around 200 and up.
std::vector<cplx> eigenvalues(const RMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("eigenvalues: matrix must be square");
  if (m.rows() == 0) return {};
  Eigen::EigenSolver<RMatrix> es(m, false);
  if (es.info() != Eigen::Success) throw LinalgError("real eigensolver failed to converge");
  const Eigen::VectorXcd& ev = es.eigenvalues();
  return std::vector<cplx>(ev.data(), ev.data() + ev.size());
}

EigenDecomposition eigen_decompose(const CMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("eigen_decompose: matrix must be square");
  const lapack_int n = static_cast<lapack_int>(m.rows());
  EigenDecomposition out;
  if (n == 0) return out;
  CMatrix work = m;
  out.values.resize(static_cast<std::size_t>(n));
  out.vectors.resize(n, n);
  const lapack_int info =
      LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', n, work.data(), n, out.values.data(), nullptr, 1,
                    out.vectors.data(), n);
  if (info != 0) throw LinalgError("zgeev failed with info=" + std::to_string(info));
  out.vectors.colwise().normalize();
  return out;
}

double lambda_max_hermitian(const CMatrix& h) {
  if (h.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw LinalgError("Hermitian eigensolver failed");
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

}  // namespace distopt
