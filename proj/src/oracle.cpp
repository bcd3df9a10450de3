#include "distopt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>

#include "distopt/stability.hpp"

namespace distopt {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Interval {
  double a, b, fa, fb;
};

// g is 1-Lipschitz and g² − (ω − c)² is concave for any c.
double interval_lower_bound(const Interval& iv, double safety) {
  const double w = iv.b - iv.a;
  const double lip = 0.5 * (iv.fa + iv.fb - w);
  const double m = std::min(iv.fa, iv.fb);
  const double conc = std::sqrt(std::max(0.0, m * m - 0.25 * w * w));
  return std::max(lip, conc) - safety;
}

using Key = std::pair<long long, long long>;

}  // namespace

GridCertificate certified_min_sigma_imagaxis(const CMatrix& m, double tol) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw std::invalid_argument("certified_min_sigma_imagaxis: nonempty square matrix required");
  if (!(tol > 0.0)) throw std::invalid_argument("certified_min_sigma_imagaxis: tol must be positive");
  const Eigen::Index n = m.rows();
  const CMatrix eye = CMatrix::Identity(n, n);
  GridCertificate cert;
  const auto g = [&](double w) {
    ++cert.evaluations;
    return sigma_min(m - cplx(0.0, w) * eye);
  };
  const double bound = 2.0 * spectral_norm(m);
  const double safety = 16.0 * kEps * (1.0 + bound);
  cert.point = RVector::Zero(1);
  if (bound == 0.0) {
    cert.value = cert.upper = cert.lower = g(0.0);
    return cert;
  }

  const int n0 = 64;
  std::vector<double> grid(n0 + 1), vals(n0 + 1);
  for (int i = 0; i <= n0; ++i) {
    grid[static_cast<std::size_t>(i)] = -bound + 2.0 * bound * i / n0;
    vals[static_cast<std::size_t>(i)] = g(grid[static_cast<std::size_t>(i)]);
  }
  double best = std::numeric_limits<double>::infinity();
  double best_w = 0.0;
  const auto offer = [&](double w, double v) {
    if (v < best || (v == best && std::abs(w) < std::abs(best_w))) {
      best = v;
      best_w = w;
    }
  };
  for (int i = 0; i <= n0; ++i) offer(grid[static_cast<std::size_t>(i)], vals[static_cast<std::size_t>(i)]);
  std::vector<Interval> active;
  for (int i = 0; i < n0; ++i) {
    const auto k = static_cast<std::size_t>(i);
    active.push_back({grid[k], grid[k + 1], vals[k], vals[k + 1]});
  }
  double lower = best;
  double width = 2.0 * bound / n0;
  while (!active.empty()) {
    std::vector<Interval> keep;
    for (const Interval& iv : active) {
      const double lb = interval_lower_bound(iv, safety);
      if (lb >= best - tol || iv.b - iv.a <= 4.0 * kEps * bound) lower = std::min(lower, lb);
      else keep.push_back(iv);
    }
    if (keep.empty()) break;
    active.clear();
    for (const Interval& iv : keep) {
      const double mid = 0.5 * (iv.a + iv.b);
      const double fm = g(mid);
      offer(mid, fm);
      active.push_back({iv.a, mid, iv.fa, fm});
      active.push_back({mid, iv.b, fm, iv.fb});
    }
    width *= 0.5;
  }
  cert.value = best;
  cert.upper = best;
  cert.lower = std::max(0.0, std::min(lower, best));
  cert.point(0) = best_w;
  cert.radius = 0.5 * width;
  return cert;
}

GridCertificate certified_min_sigma_cplus(const CMatrix& av, const CMatrix& v, double bound,
                                          double tol) {
  if (av.rows() != v.rows() || av.cols() != v.cols() || v.cols() == 0 || v.rows() < v.cols())
    throw std::invalid_argument("certified_min_sigma_cplus: AV and V must be n×ℓ with n ≥ ℓ ≥ 1");
  if (!(tol > 0.0)) throw std::invalid_argument("certified_min_sigma_cplus: tol must be positive");
  if (!(bound >= 0.0)) throw std::invalid_argument("certified_min_sigma_cplus: bound must be nonnegative");
  GridCertificate cert;
  cert.point = RVector::Zero(2);
  const auto sigma = [&](double alpha, double omega) {
    ++cert.evaluations;
    return sigma_min(av - cplx(alpha, omega) * v);
  };
  if (bound == 0.0) {
    cert.value = cert.upper = cert.lower = sigma(0.0, 0.0);
    return cert;
  }
  const double safety = 16.0 * kEps * (1.0 + bound + spectral_norm(av));

  // Corner (i, j) at depth k sits at (i·h_k, −bound + j·h_k), h_k = bound/(8·2^k);
  // keys are stored at the finest depth so corners are shared across levels.
  constexpr int kMaxDepth = 40;
  const double h0 = bound / 8.0;
  std::map<Key, double> cache;
  double best = std::numeric_limits<double>::infinity();
  double best_a = 0.0, best_w = 0.0;
  const auto corner = [&](long long i, long long j, int depth) {
    const long long scale = 1LL << (kMaxDepth - depth);
    const Key key{i * scale, j * scale};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const double h = h0 / static_cast<double>(1LL << depth);
    const double alpha = static_cast<double>(i) * h;
    const double omega = -bound + static_cast<double>(j) * h;
    const double val = sigma(alpha, omega);
    cache.emplace(key, val);
    if (val < best || (val == best && std::abs(omega) < std::abs(best_w))) {
      best = val;
      best_a = alpha;
      best_w = omega;
    }
    return val;
  };
  struct Cell {
    long long i, j;
    int depth;
  };
  std::vector<Cell> active;
  for (long long i = 0; i < 8; ++i)
    for (long long j = 0; j < 16; ++j) active.push_back({i, j, 0});
  const auto cell_lb = [&](const Cell& c) {
    const double f00 = corner(c.i, c.j, c.depth), f10 = corner(c.i + 1, c.j, c.depth);
    const double f01 = corner(c.i, c.j + 1, c.depth), f11 = corner(c.i + 1, c.j + 1, c.depth);
    const double m = std::min({f00, f10, f01, f11});
    const double h = h0 / static_cast<double>(1LL << c.depth);
    const double r2 = 0.5 * h * h;  // squared half-diagonal
    const double lip = m - std::sqrt(r2);
    const double conc = std::sqrt(std::max(0.0, m * m - r2));
    return std::max(lip, conc) - safety;
  };
  for (const Cell& c : active) cell_lb(c);
  double lower = std::numeric_limits<double>::infinity();
  int depth = 0;
  while (!active.empty()) {
    std::vector<Cell> keep;
    for (const Cell& c : active) {
      const double lb = cell_lb(c);
      if (lb >= best - tol || c.depth >= kMaxDepth) lower = std::min(lower, lb);
      else keep.push_back(c);
    }
    active.clear();
    for (const Cell& c : keep)
      for (long long di = 0; di < 2; ++di)
        for (long long dj = 0; dj < 2; ++dj) {
          const Cell child{2 * c.i + di, 2 * c.j + dj, c.depth + 1};
          cell_lb(child);
          active.push_back(child);
        }
    if (!keep.empty()) ++depth;
  }
  cert.value = best;
  cert.upper = best;
  cert.lower = std::max(0.0, std::min(lower, best));
  cert.point << best_a, best_w;
  cert.radius = 0.5 * std::sqrt(2.0) * h0 / static_cast<double>(1LL << depth);
  return cert;
}

double distance_lipschitz_constant(const ParamMatrixFun& fun, const Box& box, int grid_per_dim) {
  std::vector<double> lip(static_cast<std::size_t>(fun.kappa()), 0.0);
  for_each_grid_point(box, grid_per_dim, [&](const RVector& x) {
    for (int j = 0; j < fun.kappa(); ++j)
      lip[static_cast<std::size_t>(j)] =
          std::max(lip[static_cast<std::size_t>(j)], fun.func(j).gradient(x).norm());
  });
  double zeta = 0.0;
  for (int j = 0; j < fun.kappa(); ++j) zeta += 1.1 * lip[static_cast<std::size_t>(j)] * fun.coeff_norm(j);
  return zeta;
}

GridCertificate brute_max_distance(const ParamMatrixFun& fun, const Box& box, const BruteMaxOptions& opts) {
  const int d = fun.dim_d();
  if (box.dim() != d) throw std::invalid_argument("brute_max_distance: box dimension mismatch");
  if (d > 2) throw std::invalid_argument("brute_max_distance: at most two parameters supported");
  if (fun.dim_n() > opts.max_n)
    throw std::invalid_argument("brute_max_distance: matrix order exceeds the cost guard of " +
                                std::to_string(opts.max_n));
  if (opts.steps_per_dim < 2) throw std::invalid_argument("brute_max_distance: need at least 2 steps");

  GridCertificate cert;
  const int fine = std::min(opts.steps_per_dim * 10, d == 1 ? 4000 : 400);
  cert.lipschitz_const = distance_lipschitz_constant(fun, box, fine);
  const double zeta = cert.lipschitz_const;

  double best = -1.0;
  RVector best_x = box.midpoint();
  const auto dist = [&](const RVector& x) {
    ++cert.evaluations;
    const double v = distance_to_instability(fun.eval_full(x), 1e-10).dist;
    if (v > best) {
      best = v;
      best_x = x;
    }
    return v;
  };

  constexpr int kMaxDepth = 40;
  const int cells0 = opts.steps_per_dim - 1;
  const RVector width = box.width();
  std::map<Key, double> cache;
  const auto corner = [&](long long i, long long j, int depth) {
    const long long scale = 1LL << (kMaxDepth - depth);
    const Key key{i * scale, d == 2 ? j * scale : 0};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const double denom = static_cast<double>(cells0) * static_cast<double>(1LL << depth);
    RVector x(d);
    x(0) = box.lower()(0) + width(0) * static_cast<double>(i) / denom;
    if (d == 2) x(1) = box.lower()(1) + width(1) * static_cast<double>(j) / denom;
    const double v = dist(box.clamp(x));
    cache.emplace(key, v);
    return v;
  };
  struct Cell {
    long long i, j;
    int depth;
  };
  const auto half_diag = [&](int depth) {
    const double denom = static_cast<double>(cells0) * static_cast<double>(1LL << depth);
    return 0.5 * width.norm() / denom;
  };
  const auto cell_ub = [&](const Cell& c) {
    double m = std::max(corner(c.i, c.j, c.depth), corner(c.i + 1, c.j, c.depth));
    if (d == 2) m = std::max({m, corner(c.i, c.j + 1, c.depth), corner(c.i + 1, c.j + 1, c.depth)});
    return m + zeta * half_diag(c.depth);
  };
  std::vector<Cell> active;
  for (long long i = 0; i < cells0; ++i)
    for (long long j = 0; j < (d == 2 ? cells0 : 1); ++j) active.push_back({i, j, 0});
  for (const Cell& c : active) cell_ub(c);

  double upper = best;
  int depth = 0;
  bool exhausted = false;
  while (!active.empty()) {
    std::vector<Cell> keep;
    for (const Cell& c : active) {
      const double ub = cell_ub(c);
      if (ub <= best + opts.value_tol || c.depth >= kMaxDepth) upper = std::max(upper, ub);
      else keep.push_back(c);
    }
    active.clear();
    if (keep.empty()) break;
    const long long per_cell = d == 2 ? 5 : 1;
    if (cert.evaluations + per_cell * static_cast<long long>(keep.size()) > opts.max_evaluations) {
      for (const Cell& c : keep) upper = std::max(upper, cell_ub(c));
      exhausted = true;
      break;
    }
    for (const Cell& c : keep)
      for (long long di = 0; di < 2; ++di)
        for (long long dj = 0; dj < (d == 2 ? 2 : 1); ++dj) {
          const Cell child{2 * c.i + di, d == 2 ? 2 * c.j + dj : 0, c.depth + 1};
          cell_ub(child);
          active.push_back(child);
        }
    ++depth;
  }

  // Pattern-search zoom around the best grid point for the lower bound.
  double h = width.maxCoeff() / (static_cast<double>(cells0) * static_cast<double>(1LL << depth));
  std::vector<RVector> dirs;
  for (int i = 0; i < d; ++i) {
    dirs.push_back(RVector::Unit(d, i));
    dirs.push_back(-RVector::Unit(d, i));
  }
  if (d == 2) {
    for (double sa : {-1.0, 1.0})
      for (double sb : {-1.0, 1.0}) dirs.push_back((RVector(2) << sa, sb).finished() / std::sqrt(2.0));
  }
  while (h > opts.tol && cert.evaluations < opts.max_evaluations + 2000) {
    const RVector base = best_x;
    bool moved = false;
    for (const RVector& dir : dirs) {
      const RVector y = box.clamp(base + h * dir);
      if ((y - base).norm() == 0.0) continue;
      const double before = best;
      dist(y);
      if (best > before) moved = true;
    }
    if (!moved) h *= 0.5;
  }

  cert.value = best;
  cert.lower = best;
  cert.point = best_x;
  cert.upper = std::max(upper, best);
  cert.radius = h;
  cert.certified = !exhausted;
  return cert;
}

}  // namespace distopt
