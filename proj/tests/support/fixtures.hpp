#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "distopt/matmodel.hpp"
#include "distopt/problem.hpp"

namespace fixtures {

using namespace distopt;

// The 4×4 random example with two feedback channels.
CMatrix example4_a();
CMatrix example4_b();
CMatrix example4_c();
/// A + x₁b₁c₁ᵀ (+ x₂b₂c₂ᵀ when d = 2) over [−5, 5]^d.
ParamMatrixFun example4_family(int d);
Box example4_box(int d);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double normal() { return normal_(gen_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  RMatrix real(Eigen::Index rows, Eigen::Index cols);
  CMatrix complex(Eigen::Index rows, Eigen::Index cols);
  RVector vec(Eigen::Index n);

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Gaussian matrix shifted so that its spectral abscissa equals −margin.
CMatrix random_stable(int n, std::uint64_t seed, bool complex, double margin = 0.3);

/// n×ℓ matrix with orthonormal columns.
CMatrix random_orthonormal(int n, int ell, std::uint64_t seed);

/// Rank-one feedback family A + Σ xⱼ bⱼcⱼᵀ with A a stable Gaussian matrix of
/// abscissa −margin, ‖bⱼ‖ = ‖cⱼ‖ = scale. `shift` is added to every gain.
ParamMatrixFun random_feedback(int n, int d, std::uint64_t seed, double margin = 0.3, double scale = 1.0,
                               double shift = 0.0);

/// B₀ + Σ xⱼBⱼ with Gaussian real coefficients scaled by 1/√n.
ParamMatrixFun random_affine(int n, int d, std::uint64_t seed);

Box cube(int d, double lo, double hi);

/// min over a uniform ω-grid of σ_min(M − iωI), |ω| ≤ bound.
double dense_grid_min_sigma(const CMatrix& m, double bound, int points);

}  // namespace fixtures
