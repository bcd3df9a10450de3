#include "distopt/subspace.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

#include "distopt/stability.hpp"

namespace distopt {

ExpandResult expand_basis(const SubspaceState& state, const CVector& v, double drop_tol) {
  const double nv = v.norm();
  if (!(nv > 0.0)) throw std::invalid_argument("expand_basis: zero vector");
  ExpandResult out{state, false};
  const CMatrix& q = state.v;
  if (q.cols() > 0 && q.rows() != v.size()) throw std::invalid_argument("expand_basis: size mismatch");
  CVector r = v;
  if (q.cols() > 0) {
    for (int pass = 0; pass < 2; ++pass) r -= q * (q.adjoint() * r);
  }
  const double nr = r.norm();
  if (nr <= drop_tol * nv) {
    out.dropped = true;
    return out;
  }
  CMatrix grown(v.size(), q.cols() + 1);
  if (q.cols() > 0) grown.leftCols(q.cols()) = q;
  grown.col(q.cols()) = r / nr;
  out.state.v = std::move(grown);
  return out;
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::basic: return "basic";
    case Variant::extended: return "extended";
    case Variant::uniform: return "uniform";
  }
  return "basic";
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::converged: return "converged";
    case RunStatus::max_iter: return "max_iter";
    case RunStatus::stagnated: return "stagnated";
    case RunStatus::stagnated_unstable: return "stagnated-unstable";
    case RunStatus::error: return "error";
  }
  return "error";
}

std::optional<Variant> parse_variant(const std::string& s) {
  if (s == "basic") return Variant::basic;
  if (s == "extended") return Variant::extended;
  if (s == "uniform") return Variant::uniform;
  return std::nullopt;
}

ReducedDist reduced_distance(const ProjectedFamily& pf, const RVector& x, Variant variant,
                             double tol) {
  return variant == Variant::uniform ? dist_reduced_imag(pf, x, tol) : dist_reduced_cplus(pf, x, tol);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct FullEval {
  bool stable = false;
  double dist = 0.0;
  CVector vec;
};

FullEval full_eval(const ParamMatrixFun& fun, const RVector& x, double tol) {
  const DistResult r = distance_to_instability(fun.eval_full(x), tol);
  FullEval fe;
  fe.stable = r.stable;
  fe.dist = r.stable ? r.dist : 0.0;
  fe.vec = r.stable ? r.triplet.v : r.eigvec;
  return fe;
}

bool same_point(const RVector& a, const RVector& b) {
  return (a - b).norm() <= 1e-12 * (1.0 + a.norm());
}

double reduced_gamma(const ParamMatrixFun& fun, const ProjectedFamily& pf, const Box& box,
                     const SubspaceConfig& cfg) {
  double g = 0.0;
  if (cfg.gamma) g = *cfg.gamma;
  else if (fun.is_affine()) g = gamma_reduced_affine(fun, pf.basis());
  else g = gamma_general(fun, pf.coeff_times_basis_norms(), box, cfg.gamma_grid_per_dim);
  g *= cfg.gamma_multiplier;
  return g > 0.0 ? g : 1e-12;
}

std::vector<RVector> stencil(const RVector& x, double h, const Box& box) {
  std::vector<RVector> pts;
  const int d = static_cast<int>(x.size());
  const double r = 1.0 / std::sqrt(2.0);
  for (int p = 0; p < d; ++p)
    for (int q = p; q < d; ++q) {
      RVector e = RVector::Zero(d);
      if (p == q) {
        e(p) = 1.0;
      } else {
        e(p) = r;
        e(q) = r;
      }
      pts.push_back(box.clamp(x + h * e));
    }
  return pts;
}

class Runner {
 public:
  Runner(const ParamMatrixFun& fun, const Box& box, const SubspaceConfig& cfg, Variant variant)
      : fun_(fun), box_(box), cfg_(cfg), variant_(variant) {}

  RunTrace run() {
    trace_.variant = variant_;
    try {
      loop();
    } catch (const std::exception& e) {
      trace_.status = RunStatus::error;
      trace_.message = e.what();
    }
    trace_.basis = state_.v;
    trace_.gap = trace_.d_upper - trace_.d_best;
    return trace_;
  }

 private:
  FullEval evaluate(const RVector& x, TraceRow* row) {
    const auto t0 = Clock::now();
    FullEval fe = full_eval(fun_, x, cfg_.full_dist_tol);
    const double dt = seconds_since(t0);
    trace_.full_seconds += dt;
    ++trace_.full_evaluations;
    if (row != nullptr) {
      row->full_seconds += dt;
      ++row->full_evaluations;
    }
    note_best(x, fe.dist);
    return fe;
  }

  void note_best(const RVector& x, double d) {
    if (trace_.x_best.size() == 0 || d > trace_.d_best) {
      trace_.x_best = x;
      trace_.d_best = d;
    }
  }

  void include(const RVector& x, const FullEval& fe, TraceRow* row) {
    const ExpandResult er = expand_basis(state_, fe.vec, cfg_.drop_tol);
    state_ = er.state;
    if (er.dropped && row != nullptr) ++row->dropped;
    trace_.interpolation_points.push_back(x);
    interp_vals_.push_back(fe.dist);
  }

  OptResult solve(const ProjectedFamily& pf, double gamma, double tol, const RVector& start) {
    const Objective obj = [&](const RVector& x) {
      const ReducedDist rd = reduced_distance(pf, x, variant_, cfg_.reduced_dist_tol);
      if (!rd.certified) trace_.certified = false;
      const ReducedGradient rg = grad_dist_reduced(pf, x, rd);
      return ObjectiveValue{rd.value * rd.value, 2.0 * rd.value * rg.grad};
    };
    return optimize(obj, box_, gamma, tol, cfg_.inner_max_iter, &start);
  }

  double interpolation_deviation() const {
    const ProjectedFamily pf(fun_, state_.v);
    double dev = 0.0;
    for (std::size_t j = 0; j < interp_vals_.size(); ++j) {
      const ReducedDist rd =
          reduced_distance(pf, trace_.interpolation_points[j], variant_, cfg_.reduced_dist_tol);
      dev = std::max(dev, std::abs(rd.value - interp_vals_[j]));
    }
    return dev;
  }

  void loop() {
    if (box_.dim() != fun_.dim_d()) throw std::invalid_argument("subspace: box dimension mismatch");
    if (!(cfg_.tol_gap > 0.0) || !(cfg_.inner_tol > 0.0) || !(cfg_.drop_tol > 0.0))
      throw std::invalid_argument("subspace: tolerances must be positive");
    if (cfg_.max_iter < 1) throw std::invalid_argument("subspace: max_iter must be at least 1");

    RVector x = box_.midpoint();
    const FullEval first = evaluate(x, nullptr);
    if (variant_ == Variant::uniform && !first.stable) {
      trace_.status = RunStatus::stagnated_unstable;
      trace_.message = "initial point is unstable";
      return;
    }
    state_.v = CMatrix(fun_.dim_n(), 0);
    include(x, first, nullptr);
    if (box_.dim() > 2) trace_.certified = false;
    trace_.d_upper = std::numeric_limits<double>::infinity();
    std::vector<RVector> iterates{x};

    for (int it = 1; it <= cfg_.max_iter; ++it) {
      TraceRow row;
      row.iter = it;
      row.basis_dim = state_.ell();
      const ProjectedFamily pf(fun_, state_.v);
      row.gamma_used = reduced_gamma(fun_, pf, box_, cfg_);

      const auto t0 = Clock::now();
      double inner_tol = cfg_.inner_tol;
      OptResult opt = solve(pf, row.gamma_used, inner_tol, x);
      if (!opt.error.empty()) {
        inner_tol /= 4.0;
        opt = solve(pf, row.gamma_used, inner_tol, x);
      }
      if (!opt.error.empty()) {
        row.reduced_seconds = seconds_since(t0);
        trace_.reduced_seconds += row.reduced_seconds;
        trace_.status = RunStatus::error;
        trace_.message = "reduced maximization failed: " + opt.error;
        return;
      }
      bool retried = false;
      const auto repeats = [&](const RVector& y) {
        for (const RVector& p : iterates)
          if (same_point(y, p)) return true;
        return false;
      };
      RVector x_new = opt.x_best;
      ReducedDist rd = reduced_distance(pf, x_new, variant_, cfg_.reduced_dist_tol);
      row.reduced_seconds = seconds_since(t0);
      trace_.reduced_seconds += row.reduced_seconds;

      FullEval fe = evaluate(x_new, &row);
      if (variant_ == Variant::uniform && !fe.stable) {
        fill(row, x_new, rd, fe, opt);
        trace_.rows.push_back(row);
        trace_.status = RunStatus::stagnated_unstable;
        trace_.message = "iterate is unstable";
        return;
      }
      if (rd.value - fe.dist > cfg_.tol_gap && repeats(x_new)) {
        // Perturbed restart with a finer inner tolerance.
        retried = true;
        const auto t1 = Clock::now();
        const RVector start = box_.clamp(x_new + 1e-3 * box_.width());
        const OptResult again = solve(pf, row.gamma_used, inner_tol / 4.0, start);
        if (again.error.empty() && !repeats(again.x_best)) {
          opt = again;
          x_new = opt.x_best;
          rd = reduced_distance(pf, x_new, variant_, cfg_.reduced_dist_tol);
          retried = false;
        }
        const double dt = seconds_since(t1);
        row.reduced_seconds += dt;
        trace_.reduced_seconds += dt;
        if (!retried) fe = evaluate(x_new, &row);
      }
      if (!opt.converged || !opt.certified) trace_.certified = false;
      fill(row, x_new, rd, fe, opt);
      trace_.d_upper = std::min(trace_.d_upper, std::max(rd.value, fe.dist));

      if (row.gap <= cfg_.tol_gap) {
        trace_.rows.push_back(row);
        trace_.status = RunStatus::converged;
        return;
      }
      if (retried) {
        trace_.rows.push_back(row);
        trace_.status = RunStatus::stagnated;
        trace_.message = "iterate repeated after a perturbed restart";
        return;
      }

      include(x_new, fe, &row);
      if (variant_ == Variant::extended) {
        const double h = (x_new - x).norm();
        if (h > 0.0) expand_stencil(x_new, h, row);
      }
      if (cfg_.verify_interpolation) row.interp_max_dev = interpolation_deviation();
      trace_.rows.push_back(row);
      iterates.push_back(x_new);
      x = x_new;
    }
    trace_.status = RunStatus::max_iter;
  }

  void expand_stencil(const RVector& x, double h, TraceRow& row) {
    const std::vector<RVector> pts = stencil(x, h, box_);
    std::vector<FullEval> evals(pts.size());
    const auto t0 = Clock::now();
    if (cfg_.threads > 1 && pts.size() > 1) {
      std::vector<std::future<FullEval>> futs;
      for (const RVector& p : pts)
        futs.push_back(std::async(std::launch::async, [this, p] {
          return full_eval(fun_, p, cfg_.full_dist_tol);
        }));
      for (std::size_t i = 0; i < pts.size(); ++i) evals[i] = futs[i].get();
    } else {
      for (std::size_t i = 0; i < pts.size(); ++i) evals[i] = full_eval(fun_, pts[i], cfg_.full_dist_tol);
    }
    const double dt = seconds_since(t0);
    row.full_seconds += dt;
    trace_.full_seconds += dt;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      ++row.full_evaluations;
      ++trace_.full_evaluations;
      note_best(pts[i], evals[i].dist);
      include(pts[i], evals[i], &row);
    }
  }

  static void fill(TraceRow& row, const RVector& x, const ReducedDist& rd, const FullEval& fe,
                   const OptResult& opt) {
    row.x = x;
    row.z = rd.z_star;
    row.reduced_val = rd.value;
    row.full_val = fe.dist;
    row.stable = fe.stable;
    row.gap = rd.value - fe.dist;
    row.reduced_upper = std::sqrt(std::max(0.0, opt.model_max));
    row.inner_iterations = opt.iterations;
  }

  const ParamMatrixFun& fun_;
  const Box& box_;
  const SubspaceConfig& cfg_;
  Variant variant_;
  SubspaceState state_;
  RunTrace trace_;
  std::vector<double> interp_vals_;
};

}  // namespace

RunTrace run_basic(const ParamMatrixFun& fun, const Box& box, const SubspaceConfig& cfg) {
  return Runner(fun, box, cfg, Variant::basic).run();
}

RunTrace run_extended(const ParamMatrixFun& fun, const Box& box, const SubspaceConfig& cfg) {
  return Runner(fun, box, cfg, Variant::extended).run();
}

RunTrace run_uniform(const ParamMatrixFun& fun, const Box& box, const SubspaceConfig& cfg) {
  return Runner(fun, box, cfg, Variant::uniform).run();
}

RunTrace run_subspace(const ParamMatrixFun& fun, const Box& box, const SubspaceConfig& cfg) {
  switch (cfg.variant) {
    case Variant::basic: return run_basic(fun, box, cfg);
    case Variant::extended: return run_extended(fun, box, cfg);
    case Variant::uniform: return run_uniform(fun, box, cfg);
  }
  return run_basic(fun, box, cfg);
}

}  // namespace distopt
