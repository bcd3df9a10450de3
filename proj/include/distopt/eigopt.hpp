#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "distopt/matmodel.hpp"

namespace distopt {

/// q(x; x_k) = f_k + g_kᵀ(x − x_k) + (γ/2)‖x − x_k‖².
struct QuadPiece {
  RVector x_k;
  double f_k = 0.0;
  RVector g_k;
};

/// Lower envelope of quadratic pieces sharing the curvature γ on a box.
///
/// Writing every piece as (γ/2)‖y‖² + a_kᵀy + b_k in coordinates y centred on
/// the box, piece k is the minimum exactly where a_kᵀy + b_k is, a convex
/// polygon. For d ≤ 2 these cells are maintained incrementally: a new piece
/// clips every live cell by one halfplane.
class SupportModel {
 public:
  SupportModel(Box box, double gamma);

  void add_piece(const RVector& x_k, double f_k, const RVector& g_k);

  double eval(const RVector& x) const;
  double eval_piece(std::size_t k, const RVector& x) const;

  const std::vector<QuadPiece>& pieces() const { return pieces_; }
  const Box& box() const { return box_; }
  double gamma() const { return gamma_; }
  bool empty() const { return pieces_.empty(); }

  /// Vertices (in x coordinates) of the region where piece k is active;
  /// empty when the piece is dominated. Only maintained for d ≤ 2.
  std::vector<RVector> cell_vertices(std::size_t k) const;
  bool tracks_cells() const { return box_.dim() <= 2; }

 private:
  using Poly = std::vector<std::array<double, 2>>;

  Box box_;
  double gamma_;
  RVector center_;
  std::vector<QuadPiece> pieces_;
  std::vector<RVector> a_;
  std::vector<double> b_;
  std::vector<Poly> cells_;
};

struct ModelMax {
  RVector x;
  double value = 0.0;
  /// False when the d ≥ 3 multistart fallback produced the point.
  bool certified = true;
};

/// Global maximizer of the envelope over the box. For d ≤ 2 the vertices of
/// the tracked cells are enumerated; the envelope restricted to a cell is
/// convex, so this is exact. Ties go to the lexicographically smallest x.
ModelMax maximize_model(const SupportModel& model);

struct ObjectiveValue {
  double value = 0.0;
  RVector gradient;
};

using Objective = std::function<ObjectiveValue(const RVector&)>;

struct OptStep {
  RVector x;
  double f = 0.0;
  double gap = 0.0;
};

struct OptResult {
  RVector x_best;
  double f_best = 0.0;
  double model_max = 0.0;
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
  bool certified = true;
  std::string error;  // set when the objective threw; history is partial
  std::vector<OptStep> history;
};

/// Support-function maximization: evaluate, add a piece, jump to the model's
/// maximizer, until model_max − f_best ≤ tol or max_iter evaluations. The first
/// point is the box midpoint unless `start` is given.
OptResult optimize(const Objective& objective, const Box& box, double gamma, double tol,
                   int max_iter, const RVector* start = nullptr);

}  // namespace distopt
