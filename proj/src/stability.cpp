#include "distopt/stability.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>

namespace distopt {
namespace {

std::atomic<long> g_van_loan_violations{0};

constexpr int kMaxLevelIterations = 60;
constexpr int kMaxPolishIterations = 60;

// a preferred over b as "rightmost": larger Re, then larger |Im|, then Im ≥ 0.
bool more_rightmost(cplx a, cplx b) {
  const double tie = 1e-12 * (1.0 + std::max(std::abs(a), std::abs(b)));
  if (std::abs(a.real() - b.real()) > tie) return a.real() > b.real();
  if (std::abs(std::abs(a.imag()) - std::abs(b.imag())) > tie)
    return std::abs(a.imag()) > std::abs(b.imag());
  return a.imag() >= 0.0 && b.imag() < 0.0;
}

std::size_t rightmost_index(const std::vector<cplx>& ev) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < ev.size(); ++i)
    if (more_rightmost(ev[i], ev[best])) best = i;
  return best;
}

void fix_phase(CVector& v, CVector* u) {
  Eigen::Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  const double mag = std::abs(v(k));
  if (mag == 0.0) return;
  const cplx phase = std::conj(v(k)) / mag;
  v *= phase;
  v(k) = cplx(v(k).real(), 0.0);
  if (u != nullptr) *u *= phase;
}

// Frequencies where σ is a singular value of M − iωI, i.e. imaginary
// eigenvalues of the Hamiltonian at level σ.
std::vector<double> level_crossings(const CMatrix& m, bool real, double sigma, double norm_m) {
  const Eigen::Index n = m.rows();
  std::vector<cplx> ev;
  if (real) {
    const RMatrix mr = m.real();
    RMatrix h(2 * n, 2 * n);
    h.topLeftCorner(n, n) = mr;
    h.topRightCorner(n, n) = -sigma * RMatrix::Identity(n, n);
    h.bottomLeftCorner(n, n) = sigma * RMatrix::Identity(n, n);
    h.bottomRightCorner(n, n) = -mr.transpose();
    ev = eigenvalues(h);
  } else {
    CMatrix h(2 * n, 2 * n);
    h.topLeftCorner(n, n) = m;
    h.topRightCorner(n, n) = -sigma * CMatrix::Identity(n, n);
    h.bottomLeftCorner(n, n) = sigma * CMatrix::Identity(n, n);
    h.bottomRightCorner(n, n) = -m.adjoint();
    ev = eigenvalues(h);
  }
  const double tol_im = 1e-8 * (norm_m + sigma);
  std::vector<double> out;
  for (const cplx& e : ev)
    if (std::abs(e.real()) <= tol_im) out.push_back(e.imag());
  std::sort(out.begin(), out.end());
  return out;
}

// candidate a beats b: smaller value, then smaller |ω|, then ω ≥ 0
bool better_minimizer(double va, double wa, double vb, double wb) {
  if (!std::isfinite(vb)) return true;
  const double tie = 1e-14 * (1.0 + std::max(std::abs(va), std::abs(vb)));
  if (std::abs(va - vb) > tie) return va < vb;
  if (std::abs(std::abs(wa) - std::abs(wb)) > tie) return std::abs(wa) < std::abs(wb);
  return wa >= 0.0 && wb < 0.0;
}

struct Sample {
  double omega;
  double value;
  double slope;  // dg/dω = Im(uᴴv)
};

Sample sample(const CMatrix& m, double omega) {
  const CMatrix shifted = m - cplx(0.0, omega) * CMatrix::Identity(m.rows(), m.cols());
  const SingularTriplet t = smallest_singular_triplet(shifted);
  return {omega, t.sigma, t.u.dot(t.v).imag()};
}

// Safeguarded secant on g' inside [lo, hi]; returns the best sample seen.
Sample polish(const CMatrix& m, Sample start, double lo, double hi) {
  Sample best = start;
  Sample cur = start;
  Sample prev{};
  bool have_prev = false;
  for (int k = 0; k < kMaxPolishIterations; ++k) {
    if (cur.slope == 0.0) break;
    if (cur.slope > 0.0) hi = std::min(hi, cur.omega);
    else lo = std::max(lo, cur.omega);
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(cur.omega))) break;
    double next = 0.5 * (lo + hi);
    if (have_prev && prev.slope != cur.slope) {
      const double s = cur.omega - cur.slope * (cur.omega - prev.omega) / (cur.slope - prev.slope);
      if (s > lo && s < hi) next = s;
    }
    if (next == cur.omega) break;
    prev = cur;
    have_prev = true;
    cur = sample(m, next);
    if (better_minimizer(cur.value, cur.omega, best.value, best.omega)) best = cur;
    if (std::abs(cur.slope) <= 1e-15) break;
  }
  return best;
}

}  // namespace

AbscissaResult spectral_abscissa(const CMatrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw std::invalid_argument("spectral_abscissa: nonempty square matrix required");
  const EigenDecomposition ed = eigen_decompose(m);
  const std::size_t k = rightmost_index(ed.values);
  AbscissaResult r;
  r.lambda_r = ed.values[k];
  r.alpha = r.lambda_r.real();
  r.w = ed.vectors.col(static_cast<Eigen::Index>(k));
  fix_phase(r.w, nullptr);
  return r;
}

double spectral_abscissa_value(const CMatrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw std::invalid_argument("spectral_abscissa_value: nonempty square matrix required");
  const std::vector<cplx> ev = is_real(m) ? eigenvalues(RMatrix(m.real())) : eigenvalues(m);
  double a = -std::numeric_limits<double>::infinity();
  for (const cplx& e : ev) a = std::max(a, e.real());
  return a;
}

SingularTriplet smallest_singular_triplet(const CMatrix& m) {
  if (m.cols() < 1 || m.rows() < m.cols())
    throw std::invalid_argument("smallest_singular_triplet: expected p >= q >= 1");
  Eigen::BDCSVD<CMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw LinalgError("SVD failed");
  const Eigen::Index q = m.cols() - 1;
  SingularTriplet t;
  t.sigma = svd.singularValues()(q);
  t.u = svd.matrixU().col(q);
  t.v = svd.matrixV().col(q);
  fix_phase(t.v, &t.u);
  return t;
}

double sigma_min_imag(const CMatrix& m, double omega) {
  return sigma_min(m - cplx(0.0, omega) * CMatrix::Identity(m.rows(), m.cols()));
}

DistResult distance_to_instability(const CMatrix& m, double tol, bool exploit_real) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw std::invalid_argument("distance_to_instability: nonempty square matrix required");
  if (!(tol > 0.0)) throw std::invalid_argument("distance_to_instability: tol must be positive");
  if (!m.allFinite()) throw std::invalid_argument("distance_to_instability: matrix has non-finite entries");

  const bool real = exploit_real && is_real(m);
  const std::vector<cplx> ev = real ? eigenvalues(RMatrix(m.real())) : eigenvalues(m);
  const cplx rightmost = ev[rightmost_index(ev)];

  DistResult res;
  if (rightmost.real() >= 0.0) {
    const EigenDecomposition ed = eigen_decompose(m);
    const std::size_t k = rightmost_index(ed.values);
    res.stable = false;
    res.dist = 0.0;
    res.z_star = ed.values[k];
    res.eigvec = ed.vectors.col(static_cast<Eigen::Index>(k));
    fix_phase(res.eigvec, nullptr);
    return res;
  }

  const double norm_m = spectral_norm(m);
  const double w0 = real ? std::abs(rightmost.imag()) : rightmost.imag();
  double best_w = w0;
  double level = sigma_min_imag(m, w0);
  if (w0 != 0.0) {
    const double at_zero = sigma_min_imag(m, 0.0);
    if (better_minimizer(at_zero, 0.0, level, best_w)) {
      level = at_zero;
      best_w = 0.0;
    }
  }
  double lo = best_w, hi = best_w;
  bool converged = false;
  int it = 0;
  for (; it < kMaxLevelIterations; ++it) {
    // g(best_w) = level, so best_w is a crossing even when the Hamiltonian
    // eigenvalue there is double and drifts off the axis.
    std::vector<double> cr = level_crossings(m, real, level, norm_m);
    cr.push_back(best_w);
    if (real) cr.push_back(-best_w);
    std::sort(cr.begin(), cr.end());
    if (cr.size() < 2) {
      converged = true;
      break;
    }
    double new_level = std::numeric_limits<double>::infinity();
    double new_w = best_w, new_lo = lo, new_hi = hi;
    for (std::size_t i = 0; i + 1 < cr.size(); ++i) {
      const double mid = 0.5 * (cr[i] + cr[i + 1]);
      if (real && cr[i + 1] < 0.0) continue;
      const double val = sigma_min_imag(m, mid);
      if (better_minimizer(val, mid, new_level, new_w)) {
        new_level = val;
        new_w = mid;
        new_lo = cr[i];
        new_hi = cr[i + 1];
      }
    }
    if (!(new_level < level)) {
      converged = true;
      break;
    }
    const double change = level - new_level;
    level = new_level;
    best_w = new_w;
    lo = new_lo;
    hi = new_hi;
    if (change <= tol * (1.0 + level)) {
      converged = true;
      ++it;
      break;
    }
  }
  if (!converged)
    throw LinalgError("distance_to_instability: level-set iteration did not converge in " +
                      std::to_string(kMaxLevelIterations) + " iterations");

  if (hi <= lo) {
    const double h = std::max(1e-6, std::sqrt(tol)) * (1.0 + std::abs(best_w));
    lo = best_w - h;
    hi = best_w + h;
  }
  Sample best = polish(m, sample(m, best_w), lo, hi);
  double w = best.omega;
  if (real) w = std::abs(w);

  res.stable = true;
  res.level_iterations = it;
  res.z_star = cplx(0.0, w);
  res.triplet = smallest_singular_triplet(m - cplx(0.0, w) * CMatrix::Identity(m.rows(), m.cols()));
  res.dist = res.triplet.sigma;
  if (std::abs(w) > 2.0 * norm_m * (1.0 + 1e-12) + 1e-300) ++g_van_loan_violations;
  return res;
}

long van_loan_violations() { return g_van_loan_violations.load(); }
void reset_van_loan_violations() { g_van_loan_violations.store(0); }

}  // namespace distopt
