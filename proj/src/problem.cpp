#include "distopt/problem.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "distopt/mmio.hpp"
#include "distopt/stability.hpp"

namespace distopt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string join_lines(const std::vector<std::string>& issues) {
  std::string out;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i > 0) out += '\n';
    out += issues[i];
  }
  return out;
}

std::string shape(const CMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

ProblemError::ProblemError(std::vector<std::string> issues)
    : std::runtime_error(join_lines(issues)), issues_(std::move(issues)) {}

std::string to_string(Method m) {
  switch (m) {
    case Method::small: return "small";
    case Method::basic: return "basic";
    case Method::extended: return "extended";
    case Method::uniform: return "uniform";
    case Method::oracle: return "oracle";
  }
  return "small";
}

std::optional<Method> parse_method(const std::string& s) {
  for (Method m : {Method::small, Method::basic, Method::extended, Method::uniform, Method::oracle})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

ParamMatrixFun feedback_family(const CMatrix& a, const CMatrix& b, const CMatrix& c,
                               const std::vector<GainSlot>& slots) {
  if (slots.empty()) throw std::invalid_argument("feedback_family: no gain slots");
  CMatrix b0 = a;
  std::vector<CMatrix> terms;
  for (const GainSlot& s : slots) {
    if (s.b_col < 0 || s.b_col >= b.cols() || s.c_row < 0 || s.c_row >= c.rows())
      throw std::invalid_argument("feedback_family: gain slot out of range");
    terms.push_back(b.col(s.b_col) * c.row(s.c_row));
    if (s.shift != 0.0) b0 += s.shift * terms.back();
  }
  return ParamMatrixFun::affine(std::move(b0), std::move(terms));
}

namespace {

class ManifestReader {
 public:
  explicit ManifestReader(const std::string& path) : path_(path), dir_(fs::path(path).parent_path()) {}

  Problem read() {
    std::ifstream in(path_);
    if (!in) throw ProblemError({path_ + ": cannot open manifest"});
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ProblemError({path_ + ": invalid JSON: " + e.what()});
    }
    if (!j.is_object()) throw ProblemError({path_ + ": manifest must be a JSON object"});
    if (j.value("schema", std::string()) != kManifestSchema)
      issue("schema must be \"" + std::string(kManifestSchema) + "\"");

    RunSettings settings = read_settings(j);
    Box box;
    const bool have_box = read_box(j, box);
    const std::string family = j.value("family", std::string());
    std::optional<ParamMatrixFun> fun;
    if (family == "affine") fun = read_affine(j);
    else if (family == "feedback") fun = read_feedback(j);
    else if (family == "custom-affine-terms") fun = read_custom(j, have_box ? box.dim() : -1);
    else issue("family must be one of affine, feedback, custom-affine-terms");

    if (fun && have_box && fun->dim_d() != box.dim())
      issue("box has dimension " + std::to_string(box.dim()) + " but the family has " +
            std::to_string(fun->dim_d()) + " parameters");
    if (!issues_.empty() || !fun || !have_box) {
      if (issues_.empty()) issue("incomplete manifest");
      throw ProblemError(issues_);
    }
    return Problem{std::move(*fun), box, settings, family};
  }

 private:
  void issue(const std::string& s) { issues_.push_back(path_ + ": " + s); }

  std::optional<CMatrix> matrix(const json& j, const std::string& what) {
    if (!j.is_string()) {
      issue(what + " must be a file path");
      return std::nullopt;
    }
    fs::path p = j.get<std::string>();
    if (p.is_relative()) p = dir_ / p;
    try {
      return read_matrix_market(p.string());
    } catch (const MatrixMarketError& e) {
      issues_.push_back(e.what());
    }
    return std::nullopt;
  }

  RunSettings read_settings(const json& j) {
    RunSettings s;
    if (j.contains("method")) {
      const auto m = j["method"].is_string() ? parse_method(j["method"].get<std::string>()) : std::nullopt;
      if (m) s.method = *m;
      else issue("method must be one of small, basic, extended, uniform, oracle");
    }
    try {
      if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        s.tol = t.value("tol", s.tol);
        s.tol_gap = t.value("tol_gap", s.tol_gap);
        s.inner_tol = t.value("inner_tol", s.inner_tol);
        s.max_iter = t.value("max_iter", s.max_iter);
        s.model_max_iter = t.value("model_max_iter", s.model_max_iter);
      }
      if (j.contains("gamma") && !j["gamma"].is_null()) s.gamma = j["gamma"].get<double>();
      s.gamma_multiplier = j.value("gamma_multiplier", s.gamma_multiplier);
      if (j.contains("oracle")) {
        const json& o = j["oracle"];
        s.oracle_steps = o.value("steps", s.oracle_steps);
        s.oracle_tol = o.value("tol", s.oracle_tol);
        s.oracle_value_tol = o.value("value_tol", s.oracle_value_tol);
        s.oracle_max_evaluations = o.value("max_evaluations", s.oracle_max_evaluations);
      }
      s.seed = j.value("seed", s.seed);
    } catch (const json::exception& e) {
      issue(std::string("bad setting: ") + e.what());
    }
    if (!(s.tol > 0.0) || !(s.tol_gap > 0.0) || !(s.inner_tol > 0.0)) issue("tolerances must be positive");
    if (s.max_iter < 1 || s.model_max_iter < 1) issue("iteration limits must be positive");
    return s;
  }

  bool read_box(const json& j, Box& box) {
    if (!j.contains("box") || !j["box"].is_object()) {
      issue("missing box");
      return false;
    }
    try {
      const auto lo = j["box"].at("lower").get<std::vector<double>>();
      const auto hi = j["box"].at("upper").get<std::vector<double>>();
      if (lo.size() != hi.size() || lo.empty()) {
        issue("box lower and upper must be nonempty and of equal length");
        return false;
      }
      box = Box(Eigen::Map<const RVector>(lo.data(), static_cast<Eigen::Index>(lo.size())),
                Eigen::Map<const RVector>(hi.data(), static_cast<Eigen::Index>(hi.size())));
      return true;
    } catch (const std::exception& e) {
      issue(std::string("bad box: ") + e.what());
    }
    return false;
  }

  std::optional<ParamMatrixFun> read_affine(const json& j) {
    if (!j.contains("matrices") || !j["matrices"].is_array() || j["matrices"].size() < 2) {
      issue("affine family needs a matrices list with at least two entries");
      return std::nullopt;
    }
    std::vector<CMatrix> ms;
    bool ok = true;
    for (std::size_t k = 0; k < j["matrices"].size(); ++k) {
      auto m = matrix(j["matrices"][k], "matrices[" + std::to_string(k) + "]");
      if (!m) {
        ok = false;
        continue;
      }
      ms.push_back(std::move(*m));
    }
    if (!ok) return std::nullopt;
    const Eigen::Index n = ms[0].rows();
    for (std::size_t k = 0; k < ms.size(); ++k)
      if (ms[k].rows() != n || ms[k].cols() != n) {
        issue("matrices[" + std::to_string(k) + "] is " + shape(ms[k]) + ", expected " +
              std::to_string(n) + "x" + std::to_string(n));
        ok = false;
      }
    if (!ok) return std::nullopt;
    CMatrix b0 = ms[0];
    ms.erase(ms.begin());
    return ParamMatrixFun::affine(std::move(b0), std::move(ms));
  }

  std::optional<ParamMatrixFun> read_feedback(const json& j) {
    if (!j.contains("feedback") || !j["feedback"].is_object()) {
      issue("feedback family needs a feedback block");
      return std::nullopt;
    }
    const json& f = j["feedback"];
    auto a = matrix(f.value("A", json()), "feedback.A");
    auto b = matrix(f.value("B", json()), "feedback.B");
    auto c = matrix(f.value("C", json()), "feedback.C");
    if (!a || !b || !c) return std::nullopt;
    bool ok = true;
    if (a->rows() != a->cols()) {
      issue("feedback.A is " + shape(*a) + ", expected a square matrix");
      ok = false;
    }
    if (b->rows() != a->rows()) {
      issue("feedback.B is " + shape(*b) + ", expected " + std::to_string(a->rows()) + " rows");
      ok = false;
    }
    if (c->cols() != a->cols()) {
      issue("feedback.C is " + shape(*c) + ", expected " + std::to_string(a->cols()) + " columns");
      ok = false;
    }
    std::vector<GainSlot> slots;
    if (!f.contains("slots") || !f["slots"].is_array() || f["slots"].empty()) {
      issue("feedback.slots must be a nonempty list");
      ok = false;
    } else {
      for (std::size_t k = 0; k < f["slots"].size(); ++k) {
        const json& s = f["slots"][k];
        const std::string where = "feedback.slots[" + std::to_string(k) + "]";
        try {
          GainSlot g;
          g.c_row = s.at("c_row").get<int>() - 1;
          g.b_col = s.at("b_col").get<int>() - 1;
          g.shift = s.value("shift", 0.0);
          if (g.b_col < 0 || g.b_col >= b->cols()) {
            issue(where + ": b_col " + std::to_string(g.b_col + 1) + " outside 1.." + std::to_string(b->cols()));
            ok = false;
          }
          if (g.c_row < 0 || g.c_row >= c->rows()) {
            issue(where + ": c_row " + std::to_string(g.c_row + 1) + " outside 1.." + std::to_string(c->rows()));
            ok = false;
          }
          slots.push_back(g);
        } catch (const json::exception& e) {
          issue(where + ": " + e.what());
          ok = false;
        }
      }
    }
    if (!ok) return std::nullopt;
    return feedback_family(*a, *b, *c, slots);
  }

  std::optional<ParamMatrixFun> read_custom(const json& j, int d) {
    if (!j.contains("terms") || !j["terms"].is_array() || j["terms"].empty()) {
      issue("custom-affine-terms family needs a nonempty terms list");
      return std::nullopt;
    }
    if (d < 1) return std::nullopt;
    std::vector<CMatrix> ms;
    std::vector<ScalarFunction> fs_;
    bool ok = true;
    Eigen::Index n = -1;
    for (std::size_t k = 0; k < j["terms"].size(); ++k) {
      const json& t = j["terms"][k];
      const std::string where = "terms[" + std::to_string(k) + "]";
      auto m = matrix(t.value("matrix", json()), where + ".matrix");
      std::vector<double> w;
      double offset = 0.0;
      try {
        w = t.value("weights", std::vector<double>(static_cast<std::size_t>(d), 0.0));
        offset = t.value("offset", 0.0);
      } catch (const json::exception& e) {
        issue(where + ": " + e.what());
        ok = false;
        continue;
      }
      if (static_cast<int>(w.size()) != d) {
        issue(where + ": weights has length " + std::to_string(w.size()) + ", expected " + std::to_string(d));
        ok = false;
      }
      if (!m) {
        ok = false;
        continue;
      }
      if (n < 0) n = m->rows();
      if (m->rows() != n || m->cols() != n) {
        issue(where + ".matrix is " + shape(*m) + ", expected " + std::to_string(n) + "x" + std::to_string(n));
        ok = false;
      }
      if (static_cast<int>(w.size()) == d)
        fs_.push_back(ScalarFunction::affine(offset, Eigen::Map<const RVector>(w.data(), d)));
      ms.push_back(std::move(*m));
    }
    if (!ok) return std::nullopt;
    return ParamMatrixFun(std::move(ms), std::move(fs_), d);
  }

  std::string path_;
  fs::path dir_;
  std::vector<std::string> issues_;
};

}  // namespace

Problem load_problem(const std::string& manifest_path) { return ManifestReader(manifest_path).read(); }

BenchResult gen_bench(const BenchOptions& opts, const std::string& out_dir) {
  if (opts.n < 2) throw std::invalid_argument("gen_bench: n must be at least 2");
  const int n = opts.n;
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  RMatrix a0(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) a0(i, j) = normal(rng);
  RVector b(n), c(n);
  for (int i = 0; i < n; ++i) b(i) = normal(rng);
  for (int i = 0; i < n; ++i) c(i) = normal(rng);

  // φ(t) = 10·α(A₀ − tI)/‖A₀ − tI‖₂ falls from 0 at t = α(A₀) to below −5 at
  // t = α(A₀) + ‖A₀‖₂.
  const CMatrix a0c = a0.cast<cplx>();
  const double alpha0 = spectral_abscissa_value(a0c);
  const double norm0 = spectral_norm(a0c);
  const auto phi = [&](double t) {
    CMatrix m = a0c;
    m.diagonal().array() -= t;
    return 10.0 * (alpha0 - t) / spectral_norm(m);
  };
  double lo = alpha0, hi = alpha0 + norm0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (phi(mid) > opts.target_abscissa) lo = mid;
    else hi = mid;
  }
  const double t = 0.5 * (lo + hi);
  CMatrix a = a0c;
  a.diagonal().array() -= t;
  a *= 10.0 / spectral_norm(a);

  BenchResult res;
  res.a = a;
  res.b = (std::sqrt(50.0) / b.norm() * b).cast<cplx>();
  res.c = (std::sqrt(50.0) / c.norm() * c).cast<cplx>();
  res.abscissa = spectral_abscissa_value(a);
  res.identity_shift = t;

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  write_matrix_market((dir / "A.mtx").string(), res.a);
  write_matrix_market((dir / "B.mtx").string(), CMatrix(res.b));
  write_matrix_market((dir / "C.mtx").string(), CMatrix(res.c.transpose()));
  json slot = {{"c_row", 1}, {"b_col", 1}};
  if (opts.shift != 0.0) slot["shift"] = opts.shift;
  const json manifest = {
      {"schema", kManifestSchema},
      {"family", "feedback"},
      {"feedback", {{"A", "A.mtx"}, {"B", "B.mtx"}, {"C", "C.mtx"}, {"slots", json::array({slot})}}},
      {"box", {{"lower", {opts.box_lower}}, {"upper", {opts.box_upper}}}},
      {"method", to_string(opts.method)},
      {"seed", opts.seed},
  };
  res.manifest_path = (dir / "manifest.json").string();
  std::ofstream out(res.manifest_path);
  if (!out) throw std::runtime_error("cannot write " + res.manifest_path);
  out << manifest.dump(2) << '\n';
  return res;
}

}  // namespace distopt
