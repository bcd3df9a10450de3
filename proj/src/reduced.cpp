#include "distopt/reduced.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace distopt {

ProjectedFamily::ProjectedFamily(const ParamMatrixFun& fun, CMatrix v) : fun_(&fun), v_(std::move(v)) {
  if (v_.rows() != fun.dim_n()) throw std::invalid_argument("ProjectedFamily: basis has wrong row count");
  if (v_.cols() < 1) throw std::invalid_argument("ProjectedFamily: empty basis");
  if (gram_deviation(v_) > 1e-8) throw std::invalid_argument("ProjectedFamily: basis is not orthonormal");
  for (int j = 0; j < fun.kappa(); ++j) {
    av_.push_back(fun.coeff(j) * v_);
    norms_.push_back(spectral_norm(av_.back()));
  }
}

CMatrix ProjectedFamily::eval(const RVector& x) const {
  const RVector w = fun_->weights(x);
  CMatrix out = CMatrix::Zero(v_.rows(), v_.cols());
  for (int j = 0; j < fun_->kappa(); ++j)
    if (w(j) != 0.0) out += w(j) * av_[static_cast<std::size_t>(j)];
  return out;
}

ReducedRect reduce_qr(const CMatrix& av, const CMatrix& v) {
  if (av.rows() != v.rows() || av.cols() != v.cols())
    throw std::invalid_argument("reduce_qr: A^V and V must have the same shape");
  const Eigen::Index ell = v.cols();
  ReducedRect r;
  r.r_a = v.adjoint() * av;
  CMatrix w = av - v * r.r_a;
  const CMatrix corr = v.adjoint() * w;
  w -= v * corr;
  r.r_a += corr;
  r.r_b = CMatrix::Zero(ell, ell);
  if (w.rows() > 0) {
    Eigen::HouseholderQR<CMatrix> qr(w);
    const Eigen::Index rows = std::min<Eigen::Index>(w.rows(), ell);
    r.r_b.topRows(rows) = qr.matrixQR().topRows(rows).triangularView<Eigen::Upper>();
  }
  return r;
}

ReducedRect reduce_qr(const ParamMatrixFun& fun, const RVector& x, const CMatrix& v) {
  return reduce_qr(fun.eval_reduced(x, v), v);
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// σ_min² of [R_A − zI; R_B] as the smallest eigenvalue of
// S0 − z R_Aᴴ − z̄ R_A + |z|² I.
class GramForm {
 public:
  explicit GramForm(const ReducedRect& r)
      : ra_(r.r_a), s0_(r.r_a.adjoint() * r.r_a + r.r_b.adjoint() * r.r_b) {}

  double sq(cplx z) const {
    CMatrix s = s0_ - z * ra_.adjoint() - std::conj(z) * ra_;
    s.diagonal().array() += std::norm(z);
    if (s.rows() == 1) return std::max(0.0, s(0, 0).real());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(s, Eigen::EigenvaluesOnly);
    return std::max(0.0, es.eigenvalues()(0));
  }

 private:
  CMatrix ra_;
  CMatrix s0_;
};

// Accurate σ_min with gradient in (Re z, Im z) from the 2ℓ×ℓ stacked matrix.
struct TallEval {
  double sigma;
  double d_alpha;
  double d_omega;
};

class TallForm {
 public:
  explicit TallForm(const ReducedRect& r) : ra_(r.r_a), rb_(r.r_b) {}

  TallEval eval(cplx z) const {
    const Eigen::Index ell = ra_.rows();
    CMatrix t(2 * ell, ell);
    t.topRows(ell) = ra_;
    t.topRows(ell).diagonal().array() -= z;
    t.bottomRows(ell) = rb_;
    Eigen::JacobiSVD<CMatrix> svd(t, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::Index q = ell - 1;
    const CVector u_top = svd.matrixU().col(q).head(ell);
    const cplx ip = u_top.dot(svd.matrixV().col(q));
    return {svd.singularValues()(q), -ip.real(), ip.imag()};
  }

 private:
  CMatrix ra_;
  CMatrix rb_;
};

struct KeyHash {
  std::size_t operator()(const std::pair<long long, long long>& k) const {
    return std::hash<long long>()(k.first * 1000003LL) ^ std::hash<long long>()(k.second);
  }
};

struct Point {
  double alpha = 0.0;
  double omega = 0.0;
  double sigma = std::numeric_limits<double>::infinity();
};

bool better(const Point& a, const Point& b) {
  if (a.sigma != b.sigma) return a.sigma < b.sigma;
  return std::abs(a.omega) < std::abs(b.omega);
}

// Projected BFGS on (α, ω) ↦ σ with α ≥ 0 (or α ≡ 0 when imag_only), weak
// Wolfe line search.
Point bfgs_polish(const TallForm& tf, Point start, bool imag_only, const ReducedOptions& opts,
                  long& evals) {
  const auto f = [&](double a, double w) {
    ++evals;
    return tf.eval(cplx(a, w));
  };
  Eigen::Vector2d p(start.alpha, start.omega);
  TallEval cur = f(p(0), p(1));
  Eigen::Vector2d g(cur.d_alpha, cur.d_omega);
  Eigen::Matrix2d h = Eigen::Matrix2d::Identity() * std::max(1e-3, cur.sigma);
  const auto free_mask = [&](const Eigen::Vector2d& pt, const Eigen::Vector2d& gr) {
    Eigen::Vector2d m(1.0, 1.0);
    if (imag_only || (pt(0) <= 0.0 && gr(0) > 0.0)) m(0) = 0.0;
    return m;
  };
  for (int it = 0; it < opts.bfgs_max_iter; ++it) {
    const Eigen::Vector2d mask = free_mask(p, g);
    const Eigen::Vector2d gm = g.cwiseProduct(mask);
    if (gm.norm() <= opts.bfgs_grad_tol) break;
    Eigen::Matrix2d hm = h;
    if (mask(0) == 0.0) {
      hm.row(0).setZero();
      hm.col(0).setZero();
    }
    Eigen::Vector2d dir = -(hm * gm);
    double slope = gm.dot(dir);
    if (!(slope < 0.0)) {
      dir = -gm;
      slope = -gm.squaredNorm();
      h = Eigen::Matrix2d::Identity() * std::max(1e-3, cur.sigma);
    }
    double lo = 0.0, hi = std::numeric_limits<double>::infinity(), t = 1.0;
    bool accepted = false;
    Eigen::Vector2d pn;
    TallEval nv{};
    for (int ls = 0; ls < 50; ++ls) {
      pn = p + t * dir;
      bool clipped = false;
      if (pn(0) < 0.0) {
        pn(0) = 0.0;
        clipped = true;
      }
      nv = f(pn(0), pn(1));
      const Eigen::Vector2d gn(nv.d_alpha, nv.d_omega);
      if (nv.sigma > cur.sigma + 1e-4 * t * slope) {
        hi = t;
      } else if (!clipped && gn.cwiseProduct(mask).dot(dir) < 0.9 * slope) {
        lo = t;
      } else {
        accepted = true;
        break;
      }
      t = std::isinf(hi) ? 2.0 * lo : 0.5 * (lo + hi);
      if (hi - lo < 1e-16 * (1.0 + p.norm())) break;
    }
    if (!accepted || !(nv.sigma <= cur.sigma)) break;
    const Eigen::Vector2d gn(nv.d_alpha, nv.d_omega);
    const Eigen::Vector2d s = pn - p;
    const Eigen::Vector2d y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-16 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::Matrix2d i2 = Eigen::Matrix2d::Identity();
      h = (i2 - rho * s * y.transpose()) * h * (i2 - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    p = pn;
    cur = nv;
    g = gn;
  }
  return {p(0), p(1), cur.sigma};
}

struct SearchSetup {
  ReducedRect rect;
  double radius;  // 2‖A^V(x)‖₂
  double lam_err;
};

SearchSetup setup(const CMatrix& av, const CMatrix& v) {
  SearchSetup s;
  s.rect = reduce_qr(av, v);
  const double nrm = spectral_norm(av);
  s.radius = 2.0 * nrm;
  s.lam_err = 64.0 * kEps * (nrm + s.radius) * (nrm + s.radius);
  return s;
}

// Tolerance the Gram-form bounds can actually certify: σ² carries an absolute
// error lam_err, i.e. about lam_err/(2σ) in σ.
double attainable_tol(double tol, double inc, double lam_err) {
  return std::max(tol, 2.0 * lam_err / std::max(inc, std::sqrt(lam_err)));
}

ReducedDist finish(const CMatrix& av, const CMatrix& v, Point best, bool certified, long evals) {
  ReducedDist rd;
  rd.z_star = cplx(best.alpha, best.omega);
  rd.triplet = smallest_singular_triplet(av - rd.z_star * v);
  rd.value = rd.triplet.sigma;
  rd.lifted_v = v * rd.triplet.v;
  rd.certified = certified;
  rd.evaluations = evals;
  return rd;
}

ReducedDist search_cplus(const CMatrix& av, const CMatrix& v, double tol, const ReducedOptions& opts) {
  if (!(tol > 0.0)) throw std::invalid_argument("dist_reduced_cplus: tol must be positive");
  const SearchSetup su = setup(av, v);
  const TallForm tf(su.rect);
  const GramForm gf(su.rect);
  long evals = 0;
  Point best;
  const auto offer_accurate = [&](double a, double w) {
    ++evals;
    const Point p{a, w, tf.eval(cplx(a, w)).sigma};
    if (better(p, best)) best = p;
  };
  offer_accurate(0.0, 0.0);
  const std::vector<cplx> ev = eigenvalues(su.rect.r_a);
  for (const cplx& e : ev) {
    offer_accurate(std::max(0.0, e.real()), e.imag());
    offer_accurate(0.0, e.imag());
  }
  if (su.radius == 0.0) return finish(av, v, best, true, evals);
  best = bfgs_polish(tf, best, false, opts, evals);

  // Branch and bound on cells of side h: σ² − |z − c|² is concave, so
  // σ ≥ sqrt(min corner σ² − h²/2) on the cell.
  constexpr int kMaxDepth = 44;
  const double r = su.radius;
  const double h0 = r / 8.0;
  std::unordered_map<std::pair<long long, long long>, double, KeyHash> cache;
  double inc = best.sigma;
  Point gram_best;
  const auto corner = [&](long long i, long long j, int depth) {
    const long long scale = 1LL << (kMaxDepth - depth);
    const std::pair<long long, long long> key{i * scale, j * scale};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const double h = h0 / static_cast<double>(1LL << depth);
    const double a = static_cast<double>(i) * h;
    const double w = -r + static_cast<double>(j) * h;
    ++evals;
    const double lam = gf.sq(cplx(a, w));
    cache.emplace(key, lam);
    const Point p{a, w, std::sqrt(lam)};
    if (better(p, gram_best)) gram_best = p;
    inc = std::min(inc, p.sigma);
    return lam;
  };
  struct Cell {
    long long i, j;
    int depth;
  };
  const auto lower_bound = [&](const Cell& c) {
    const double m = std::min({corner(c.i, c.j, c.depth), corner(c.i + 1, c.j, c.depth),
                               corner(c.i, c.j + 1, c.depth), corner(c.i + 1, c.j + 1, c.depth)});
    const double h = h0 / static_cast<double>(1LL << c.depth);
    return std::sqrt(std::max(0.0, m - 0.5 * h * h - su.lam_err));
  };
  std::vector<Cell> active;
  for (long long i = 0; i < 8; ++i)
    for (long long j = 0; j < 16; ++j) active.push_back({i, j, 0});
  for (const Cell& c : active) lower_bound(c);
  bool certified = true;
  while (!active.empty()) {
    std::vector<Cell> next;
    const double tol_eff = attainable_tol(tol, inc, su.lam_err);
    for (const Cell& c : active) {
      if (lower_bound(c) >= inc - tol_eff) continue;
      if (c.depth >= kMaxDepth) {
        certified = false;
        continue;
      }
      for (long long di = 0; di < 2; ++di)
        for (long long dj = 0; dj < 2; ++dj) next.push_back({2 * c.i + di, 2 * c.j + dj, c.depth + 1});
    }
    if (evals + 5 * static_cast<long>(next.size()) > opts.max_evaluations) {
      certified = false;
      break;
    }
    for (const Cell& c : next) lower_bound(c);
    active = std::move(next);
  }
  if (gram_best.sigma < best.sigma) {
    Point p = bfgs_polish(tf, gram_best, false, opts, evals);
    if (better(p, best)) best = p;
  }
  return finish(av, v, best, certified, evals);
}

// 1-D polish of ω ↦ σ on α = 0: safeguarded secant on the derivative.
Point secant_polish(const TallForm& tf, Point start, double lo, double hi, long& evals) {
  Point best = start;
  double w = start.omega;
  TallEval cur = tf.eval(cplx(0.0, w));
  ++evals;
  double prev_w = 0.0, prev_d = 0.0;
  bool have_prev = false;
  for (int k = 0; k < 60; ++k) {
    if (cur.d_omega == 0.0) break;
    if (cur.d_omega > 0.0) hi = std::min(hi, w);
    else lo = std::max(lo, w);
    if (hi - lo <= 4.0 * kEps * (1.0 + std::abs(w))) break;
    double nw = 0.5 * (lo + hi);
    if (have_prev && prev_d != cur.d_omega) {
      const double s = w - cur.d_omega * (w - prev_w) / (cur.d_omega - prev_d);
      if (s > lo && s < hi) nw = s;
    }
    if (nw == w) break;
    prev_w = w;
    prev_d = cur.d_omega;
    have_prev = true;
    w = nw;
    cur = tf.eval(cplx(0.0, w));
    ++evals;
    const Point p{0.0, w, cur.sigma};
    if (better(p, best)) best = p;
  }
  return best;
}

ReducedDist search_imag(const CMatrix& av, const CMatrix& v, double tol, const ReducedOptions& opts) {
  if (!(tol > 0.0)) throw std::invalid_argument("dist_reduced_imag: tol must be positive");
  const SearchSetup su = setup(av, v);
  const TallForm tf(su.rect);
  const GramForm gf(su.rect);
  long evals = 0;
  Point best;
  const auto offer_accurate = [&](double w) {
    ++evals;
    const Point p{0.0, w, tf.eval(cplx(0.0, w)).sigma};
    if (better(p, best)) best = p;
  };
  offer_accurate(0.0);
  for (const cplx& e : eigenvalues(su.rect.r_a)) offer_accurate(e.imag());
  if (su.radius == 0.0) return finish(av, v, best, true, evals);

  const double r = su.radius;
  struct Iv {
    double a, b, la, lb;
  };
  const auto lam = [&](double w) {
    ++evals;
    const double l = gf.sq(cplx(0.0, w));
    const Point p{0.0, w, std::sqrt(l)};
    if (better(p, best)) best = p;
    return l;
  };
  const int n0 = 64;
  std::vector<Iv> active;
  double prev_w = -r, prev_l = lam(-r);
  for (int i = 1; i <= n0; ++i) {
    const double w = -r + 2.0 * r * i / n0;
    const double l = lam(w);
    active.push_back({prev_w, w, prev_l, l});
    prev_w = w;
    prev_l = l;
  }
  const auto lower_bound = [&](const Iv& iv) {
    const double half = 0.5 * (iv.b - iv.a);
    return std::sqrt(std::max(0.0, std::min(iv.la, iv.lb) - half * half - su.lam_err));
  };
  bool certified = true;
  double bracket_lo = -r, bracket_hi = r;
  while (!active.empty()) {
    std::vector<Iv> next;
    const double tol_eff = attainable_tol(tol, best.sigma, su.lam_err);
    for (const Iv& iv : active) {
      if (lower_bound(iv) >= best.sigma - tol_eff) continue;
      if (iv.b - iv.a <= 4.0 * kEps * r) {
        certified = false;
        continue;
      }
      const double mid = 0.5 * (iv.a + iv.b);
      const double lm = lam(mid);
      next.push_back({iv.a, mid, iv.la, lm});
      next.push_back({mid, iv.b, lm, iv.lb});
    }
    if (evals > opts.max_evaluations) {
      certified = false;
      break;
    }
    active = std::move(next);
  }
  // Re-evaluate the winner accurately and polish inside a small bracket.
  Point start{0.0, best.omega, tf.eval(cplx(0.0, best.omega)).sigma};
  ++evals;
  const double h = 2.0 * r / n0;
  bracket_lo = std::max(-r, best.omega - h);
  bracket_hi = std::min(r, best.omega + h);
  best = secant_polish(tf, start, bracket_lo, bracket_hi, evals);
  return finish(av, v, best, certified, evals);
}

}  // namespace

ReducedDist dist_reduced_cplus(const ProjectedFamily& pf, const RVector& x, double tol,
                               const ReducedOptions& opts) {
  return search_cplus(pf.eval(x), pf.basis(), tol, opts);
}

ReducedDist dist_reduced_cplus(const ParamMatrixFun& fun, const RVector& x, const CMatrix& v, double tol) {
  return search_cplus(fun.eval_reduced(x, v), v, tol, {});
}

ReducedDist dist_reduced_imag(const ProjectedFamily& pf, const RVector& x, double tol,
                              const ReducedOptions& opts) {
  return search_imag(pf.eval(x), pf.basis(), tol, opts);
}

ReducedDist dist_reduced_imag(const ParamMatrixFun& fun, const RVector& x, const CMatrix& v, double tol) {
  return search_imag(fun.eval_reduced(x, v), v, tol, {});
}

ReducedGradient grad_dist_reduced(const ProjectedFamily& pf, const RVector& x, const ReducedDist& rd) {
  const ParamMatrixFun& fun = pf.fun();
  const RMatrix g = fun.weight_gradients(x);
  RVector re(fun.kappa());
  for (int j = 0; j < fun.kappa(); ++j) re(j) = rd.triplet.u.dot(pf.coeff_times_basis(j) * rd.triplet.v).real();
  ReducedGradient out;
  out.grad = g * re;
  const CMatrix m = pf.eval(x) - rd.z_star * pf.basis();
  if (m.cols() >= 2) {
    const RVector s = singular_values(m);
    const double smin = s(s.size() - 1), snext = s(s.size() - 2);
    out.smooth = snext - smin > 1e-8 * std::max(1.0, snext);
  }
  return out;
}

ReducedGradient grad_dist_reduced(const ParamMatrixFun& fun, const RVector& x, const CMatrix& v,
                                  const ReducedDist& rd) {
  return grad_dist_reduced(ProjectedFamily(fun, v), x, rd);
}

double gamma_reduced_affine(const ParamMatrixFun& fun, const CMatrix& v) {
  if (!fun.is_affine()) throw std::invalid_argument("gamma_reduced_affine requires an affine family");
  if (v.rows() != fun.dim_n()) throw std::invalid_argument("gamma_reduced_affine: basis has wrong row count");
  std::vector<CMatrix> projected;
  for (const CMatrix& b : fun.slopes()) projected.push_back(b * v);
  return gamma_from_slopes(projected);
}

}  // namespace distopt
