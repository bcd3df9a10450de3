#include "distopt/run.hpp"

#include <chrono>
#include <cmath>

#include "distopt/oracle.hpp"
#include "distopt/smallmax.hpp"
#include "distopt/subspace.hpp"

namespace distopt {

namespace {

using Clock = std::chrono::steady_clock;

BruteMaxOptions oracle_options(const RunSettings& s) {
  BruteMaxOptions o;
  o.steps_per_dim = s.oracle_steps;
  o.tol = s.oracle_tol;
  o.value_tol = s.oracle_value_tol;
  o.max_evaluations = s.oracle_max_evaluations;
  return o;
}

OracleSummary summarize(const GridCertificate& c) {
  OracleSummary o;
  o.value = c.value;
  o.lower = c.lower;
  o.upper = c.upper;
  o.point = c.point;
  o.certified = c.certified;
  o.evaluations = c.evaluations;
  return o;
}

RunReport run_small(const Problem& p) {
  const RunSettings& s = p.settings;
  SmallMaxConfig cfg;
  cfg.gamma = s.gamma;
  cfg.gamma_multiplier = s.gamma_multiplier;
  cfg.tol = s.tol;
  cfg.max_iter = s.model_max_iter;
  const SmallMaxResult res = maximize_small(p.fun, p.box, cfg);
  RunReport r;
  r.status = res.opt.converged ? "converged" : (res.opt.error.empty() ? "max_iter" : "error");
  r.message = res.opt.error;
  r.x_best = res.x_best;
  r.d_best = res.dist_best;
  r.d_upper = res.dist_upper;
  r.gap = res.dist_upper - res.dist_best;
  r.iterations = res.opt.iterations;
  r.basis_dim = p.fun.dim_n();
  r.gamma = res.gamma;
  r.certified = res.opt.certified;
  double best = -1.0;
  int k = 0;
  for (const OptStep& st : res.opt.history) {
    best = std::max(best, st.f);
    ReportRow row;
    row.iter = ++k;
    row.basis_dim = p.fun.dim_n();
    row.x = st.x;
    row.gamma = res.gamma;
    row.full_val = std::sqrt(std::max(0.0, st.f));
    row.reduced_val = std::sqrt(std::max(0.0, st.gap + best));
    row.gap = row.reduced_val - std::sqrt(std::max(0.0, best));
    row.stable = st.f > 0.0;
    row.full_evaluations = 1;
    r.rows.push_back(row);
  }
  return r;
}

RunReport run_framework(const Problem& p, Variant v, int threads) {
  const RunSettings& s = p.settings;
  SubspaceConfig cfg;
  cfg.tol_gap = s.tol_gap;
  cfg.max_iter = s.max_iter;
  cfg.inner_tol = s.inner_tol;
  cfg.inner_max_iter = s.model_max_iter;
  cfg.variant = v;
  cfg.gamma = s.gamma;
  cfg.gamma_multiplier = s.gamma_multiplier;
  cfg.threads = threads;
  const RunTrace t = run_subspace(p.fun, p.box, cfg);
  RunReport r;
  r.status = to_string(t.status);
  r.message = t.message;
  r.x_best = t.x_best;
  r.d_best = t.d_best;
  r.d_upper = std::isfinite(t.d_upper) ? t.d_upper : t.d_best;
  r.gap = r.d_upper - r.d_best;
  r.iterations = static_cast<int>(t.rows.size());
  r.basis_dim = static_cast<int>(t.basis.cols());
  r.gamma = t.rows.empty() ? 0.0 : t.rows.back().gamma_used;
  r.certified = t.certified;
  r.reduced_seconds = t.reduced_seconds;
  r.full_seconds = t.full_seconds;
  for (const TraceRow& tr : t.rows) {
    ReportRow row;
    row.iter = tr.iter;
    row.basis_dim = tr.basis_dim;
    row.x = tr.x;
    row.z = tr.z;
    row.gamma = tr.gamma_used;
    row.reduced_val = tr.reduced_val;
    row.full_val = tr.full_val;
    row.gap = tr.gap;
    row.stable = tr.stable;
    row.full_evaluations = tr.full_evaluations;
    row.reduced_seconds = tr.reduced_seconds;
    row.full_seconds = tr.full_seconds;
    r.rows.push_back(row);
  }
  return r;
}

RunReport run_oracle(const Problem& p, const GridCertificate& c) {
  RunReport r;
  r.status = c.certified ? "converged" : "max_iter";
  if (!c.certified) r.message = "evaluation budget exhausted before certification";
  r.x_best = c.point;
  r.d_best = c.value;
  r.d_upper = c.upper;
  r.gap = c.upper - c.lower;
  r.iterations = 1;
  r.basis_dim = p.fun.dim_n();
  r.certified = c.certified;
  ReportRow row;
  row.iter = 1;
  row.basis_dim = p.fun.dim_n();
  row.x = c.point;
  row.reduced_val = c.upper;
  row.full_val = c.value;
  row.gap = c.upper - c.lower;
  row.stable = c.value > 0.0;
  row.full_evaluations = static_cast<int>(c.evaluations);
  r.rows.push_back(row);
  r.oracle = summarize(c);
  return r;
}

}  // namespace

RunReport run_problem(const Problem& problem, const RunOptions& opts) {
  const auto t0 = Clock::now();
  const Method m = problem.settings.method;
  RunReport r;
  try {
    std::optional<GridCertificate> cert;
    if (m == Method::oracle || opts.with_oracle)
      cert = brute_max_distance(problem.fun, problem.box, oracle_options(problem.settings));
    switch (m) {
      case Method::small: r = run_small(problem); break;
      case Method::basic: r = run_framework(problem, Variant::basic, opts.threads); break;
      case Method::extended: r = run_framework(problem, Variant::extended, opts.threads); break;
      case Method::uniform: r = run_framework(problem, Variant::uniform, opts.threads); break;
      case Method::oracle: r = run_oracle(problem, *cert); break;
    }
    if (cert && m != Method::oracle) {
      OracleSummary o = summarize(*cert);
      if (r.x_best.size() == cert->point.size()) {
        o.x_error = (r.x_best - cert->point).norm();
        for (ReportRow& row : r.rows) row.x_error = (row.x - cert->point).norm();
      }
      o.value_error = r.d_best - cert->value;
      r.oracle = o;
    }
  } catch (const std::exception& e) {
    r = RunReport{};
    r.status = "error";
    r.message = e.what();
  }
  r.method = to_string(m);
  r.total_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

}  // namespace distopt
