#pragma once

#include "distopt/linalg.hpp"

namespace distopt {

/// Unit vectors with M v = σ u and uᴴ M = σ vᴴ. The largest-magnitude entry
/// of v is real and positive; u carries the matching phase.
struct SingularTriplet {
  double sigma = 0.0;
  CVector u;
  CVector v;
};

struct AbscissaResult {
  double alpha = 0.0;
  cplx lambda_r;
  CVector w;  // unit eigenvector for lambda_r
};

struct DistResult {
  bool stable = false;
  double dist = 0.0;
  /// iω* when stable, the chosen eigenvalue in the closed right half-plane otherwise.
  cplx z_star;
  SingularTriplet triplet;  // at M − z*I, stable case only
  CVector eigvec;           // unstable case only
  int level_iterations = 0;
};

/// Rightmost eigenvalue with unit eigenvector. Among eigenvalues with the same
/// real part the one with largest |Im| wins, then nonnegative Im.
AbscissaResult spectral_abscissa(const CMatrix& m);

/// max Re λ only (no eigenvectors).
double spectral_abscissa_value(const CMatrix& m);

/// Smallest singular value and a consistent pair of a p×q matrix, p ≥ q ≥ 1.
SingularTriplet smallest_singular_triplet(const CMatrix& m);

/// σ_min(M − iωI).
double sigma_min_imag(const CMatrix& m, double omega);

/// Distance to instability by the Boyd–Balakrishnan level-set iteration on
/// the Hamiltonian [[M, −σI], [σI, −Mᴴ]], followed by a local polish of ω.
/// Real M returns the representative with ω* ≥ 0 unless `exploit_real` is
/// false, in which case M is treated as a general complex matrix.
DistResult distance_to_instability(const CMatrix& m, double tol = 1e-8, bool exploit_real = true);

/// Number of stable results so far whose ω* violated |ω*| ≤ 2‖M‖₂.
long van_loan_violations();
void reset_van_loan_violations();

}  // namespace distopt
