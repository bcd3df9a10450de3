#include "distopt/eigopt.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace distopt {

namespace {

using Point2 = std::array<double, 2>;

// Keeps the part of a convex polygon with n·y ≤ rhs.
std::vector<Point2> clip(const std::vector<Point2>& poly, const Point2& n, double rhs) {
  std::vector<Point2> out;
  if (poly.empty()) return out;
  const auto side = [&](const Point2& p) { return n[0] * p[0] + n[1] * p[1] - rhs; };
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % poly.size()];
    const double sp = side(p), sq = side(q);
    if (sp <= 0.0) out.push_back(p);
    if ((sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0)) {
      const double t = sp / (sp - sq);
      out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
    }
  }
  return out;
}

// Intervals are stored as the two-point polygon {lo, hi} on the first axis.
std::vector<Point2> clip_1d(const std::vector<Point2>& seg, double coef, double rhs) {
  if (seg.empty()) return seg;
  double lo = seg[0][0], hi = seg[1][0];
  if (coef > 0.0) hi = std::min(hi, rhs / coef);
  else if (coef < 0.0) lo = std::max(lo, rhs / coef);
  else if (rhs < 0.0) return {};
  if (lo > hi) return {};
  return {{lo, 0.0}, {hi, 0.0}};
}

}  // namespace

SupportModel::SupportModel(Box box, double gamma)
    : box_(std::move(box)), gamma_(gamma), center_(box_.midpoint()) {
  if (!(gamma_ >= 0.0) || !std::isfinite(gamma_))
    throw std::invalid_argument("SupportModel: gamma must be finite and nonnegative");
}

void SupportModel::add_piece(const RVector& x_k, double f_k, const RVector& g_k) {
  if (x_k.size() != box_.dim() || g_k.size() != box_.dim())
    throw std::invalid_argument("add_piece: dimension mismatch");
  pieces_.push_back({x_k, f_k, g_k});
  const RVector s = x_k - center_;
  const RVector a = g_k - gamma_ * s;
  const double b = f_k - g_k.dot(s) + 0.5 * gamma_ * s.squaredNorm();
  if (tracks_cells()) {
    const RVector lo = box_.lower() - center_;
    const RVector hi = box_.upper() - center_;
    const int d = box_.dim();
    Poly cell = d == 1 ? Poly{{lo(0), 0.0}, {hi(0), 0.0}}
                       : Poly{{lo(0), lo(1)}, {hi(0), lo(1)}, {hi(0), hi(1)}, {lo(0), hi(1)}};
    for (std::size_t j = 0; j < cells_.size(); ++j) {
      if (cells_[j].empty()) continue;
      const RVector dn = a - a_[j];
      const double rhs = b_[j] - b;
      if (d == 1) {
        cell = clip_1d(cell, dn(0), rhs);
        cells_[j] = clip_1d(cells_[j], -dn(0), -rhs);
      } else if (dn(0) == 0.0 && dn(1) == 0.0) {
        if (rhs < 0.0) cell.clear();
        else if (rhs > 0.0) cells_[j].clear();
      } else {
        if (!cell.empty()) cell = clip(cell, {dn(0), dn(1)}, rhs);
        cells_[j] = clip(cells_[j], {-dn(0), -dn(1)}, -rhs);
      }
    }
    cells_.push_back(std::move(cell));
  }
  a_.push_back(a);
  b_.push_back(b);
}

std::vector<RVector> SupportModel::cell_vertices(std::size_t k) const {
  std::vector<RVector> out;
  if (!tracks_cells()) return out;
  const int d = box_.dim();
  for (const auto& p : cells_.at(k)) {
    RVector x(d);
    for (int i = 0; i < d; ++i) x(i) = center_(i) + p[static_cast<std::size_t>(i)];
    out.push_back(box_.clamp(x));
  }
  return out;
}

double SupportModel::eval_piece(std::size_t k, const RVector& x) const {
  const QuadPiece& p = pieces_.at(k);
  const RVector dx = x - p.x_k;
  return p.f_k + p.g_k.dot(dx) + 0.5 * gamma_ * dx.squaredNorm();
}

double SupportModel::eval(const RVector& x) const {
  if (pieces_.empty()) throw std::logic_error("SupportModel::eval on an empty model");
  double v = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < pieces_.size(); ++k) v = std::min(v, eval_piece(k, x));
  return v;
}

namespace {

bool lex_less(const RVector& a, const RVector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) < b(i)) return true;
    if (a(i) > b(i)) return false;
  }
  return false;
}

void consider(const SupportModel& model, const RVector& x, ModelMax& best, bool& have) {
  const double v = model.eval(x);
  if (!have) {
    best.x = x;
    best.value = v;
    have = true;
    return;
  }
  const double tie = 1e-12 * (1.0 + std::abs(best.value));
  if (v > best.value + tie || (v >= best.value - tie && lex_less(x, best.x))) {
    best.x = x;
    best.value = v;
  }
}

void box_corners(const Box& box, std::vector<RVector>& out) {
  const int d = box.dim();
  if (d > 20) return;
  for (long mask = 0; mask < (1L << d); ++mask) {
    RVector x(d);
    for (int i = 0; i < d; ++i) x(i) = (mask >> i) & 1 ? box.upper()(i) : box.lower()(i);
    out.push_back(x);
  }
}

RVector ascend(const SupportModel& model, RVector x) {
  const Box& box = model.box();
  double fx = model.eval(x);
  double step = box.width().maxCoeff();
  if (step == 0.0) return x;
  for (int it = 0; it < 200 && step > 1e-12 * (1.0 + box.width().maxCoeff()); ++it) {
    std::size_t act = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < model.pieces().size(); ++k) {
      const double v = model.eval_piece(k, x);
      if (v < best) {
        best = v;
        act = k;
      }
    }
    const QuadPiece& p = model.pieces()[act];
    RVector g = p.g_k + model.gamma() * (x - p.x_k);
    if (g.norm() == 0.0) g = RVector::Ones(x.size());
    const RVector trial = box.clamp(x + step * g.normalized());
    const double ft = model.eval(trial);
    if (ft > fx) {
      x = trial;
      fx = ft;
    } else {
      step *= 0.5;
    }
  }
  return x;
}

ModelMax multistart(const SupportModel& model) {
  const Box& box = model.box();
  const int d = box.dim();
  const int count = 50 * d;
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::vector<int>> perms(static_cast<std::size_t>(d));
  for (auto& p : perms) {
    p.resize(static_cast<std::size_t>(count));
    std::iota(p.begin(), p.end(), 0);
    std::shuffle(p.begin(), p.end(), rng);
  }
  ModelMax best;
  bool have = false;
  std::vector<RVector> corners;
  box_corners(box, corners);
  for (const RVector& x : corners) consider(model, x, best, have);
  for (int s = 0; s < count; ++s) {
    RVector x(d);
    for (int i = 0; i < d; ++i) {
      const double t = (perms[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)] + unif(rng)) / count;
      x(i) = box.lower()(i) + t * box.width()(i);
    }
    consider(model, ascend(model, x), best, have);
  }
  best.certified = false;
  return best;
}

}  // namespace

ModelMax maximize_model(const SupportModel& model) {
  if (model.empty()) throw std::invalid_argument("maximize_model: model has no pieces");
  if (!model.tracks_cells()) return multistart(model);
  ModelMax best;
  bool have = false;
  const double tie_rel = 1e-12;
  for (std::size_t k = 0; k < model.pieces().size(); ++k) {
    for (const RVector& x : model.cell_vertices(k)) {
      const double v = model.eval_piece(k, x);
      const double tie = tie_rel * (1.0 + std::abs(best.value));
      if (!have || v > best.value + tie || (v >= best.value - tie && lex_less(x, best.x))) {
        best.x = x;
        best.value = v;
        have = true;
      }
    }
  }
  if (!have) return multistart(model);
  // Rounding in the clipping can leave a vertex marginally outside its cell.
  best.value = std::min(best.value, model.eval(best.x));
  best.certified = true;
  return best;
}

OptResult optimize(const Objective& objective, const Box& box, double gamma, double tol,
                   int max_iter, const RVector* start) {
  if (!(gamma > 0.0)) throw std::invalid_argument("optimize: gamma must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("optimize: tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("optimize: max_iter must be at least 1");
  SupportModel model(box, gamma);
  OptResult res;
  res.f_best = -std::numeric_limits<double>::infinity();
  RVector x = start != nullptr ? box.clamp(*start) : box.midpoint();
  while (true) {
    ObjectiveValue ov;
    try {
      ov = objective(x);
    } catch (const std::exception& e) {
      res.error = e.what();
      break;
    }
    ++res.iterations;
    model.add_piece(x, ov.value, ov.gradient);
    if (ov.value > res.f_best) {
      res.f_best = ov.value;
      res.x_best = x;
    }
    const ModelMax mm = maximize_model(model);
    res.model_max = mm.value;
    res.gap = mm.value - res.f_best;
    res.certified = mm.certified;
    res.history.push_back({x, ov.value, res.gap});
    if (res.gap <= tol) {
      res.converged = true;
      break;
    }
    if (res.iterations >= max_iter) break;
    x = mm.x;
  }
  return res;
}

}  // namespace distopt
