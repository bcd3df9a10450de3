#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace distopt {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr cplx kImag{0.0, 1.0};

/// Raised when a dense factorization or eigensolver reports failure.
class LinalgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Largest singular value.
double spectral_norm(const CMatrix& m);

/// Singular values in decreasing order.
RVector singular_values(const CMatrix& m);

/// Smallest singular value of a p×q matrix with p ≥ q.
double sigma_min(const CMatrix& m);

/// max |(VᴴV − I)_ij|.
double gram_deviation(const CMatrix& v);

/// True when every entry has an exactly zero imaginary part.
bool is_real(const CMatrix& m);

/// Eigenvalues of a general square matrix (LAPACK zgeev; Eigen for real input).
std::vector<cplx> eigenvalues(const CMatrix& m);
std::vector<cplx> eigenvalues(const RMatrix& m);

struct EigenDecomposition {
  std::vector<cplx> values;
  CMatrix vectors;  // unit 2-norm columns
};

/// Eigenvalues together with right eigenvectors.
EigenDecomposition eigen_decompose(const CMatrix& m);

/// Largest eigenvalue of a Hermitian matrix.
double lambda_max_hermitian(const CMatrix& h);

}  // namespace distopt
