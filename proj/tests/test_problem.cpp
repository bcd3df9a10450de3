#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "distopt/mmio.hpp"
#include "distopt/problem.hpp"
#include "distopt/stability.hpp"
#include "fixtures.hpp"

using namespace distopt;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("distopt_test_problem_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_manifest(const fs::path& dir, const json& j) {
  const fs::path p = dir / "manifest.json";
  std::ofstream(p) << j.dump(2);
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> issues_of(const std::string& path) {
  try {
    load_problem(path);
  } catch (const ProblemError& e) {
    return e.issues();
  }
  return {};
}

bool mentions(const std::vector<std::string>& issues, const std::string& needle) {
  for (const auto& s : issues)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

json feedback_manifest() {
  return {{"schema", kManifestSchema},
          {"family", "feedback"},
          {"feedback", {{"A", "A.mtx"}, {"B", "B.mtx"}, {"C", "C.mtx"}, {"slots", {{{"c_row", 1}, {"b_col", 1}}}}}},
          {"box", {{"lower", {-5.0}}, {"upper", {5.0}}}},
          {"method", "small"}};
}

}  // namespace

TEST_CASE("feedback manifest expands to an affine family") {
  const fs::path dir = fresh_dir("feedback");
  write_matrix_market((dir / "A.mtx").string(), fixtures::example4_a());
  write_matrix_market((dir / "B.mtx").string(), fixtures::example4_b());
  write_matrix_market((dir / "C.mtx").string(), fixtures::example4_c());
  const Problem p = load_problem(write_manifest(dir, feedback_manifest()));
  CHECK(p.fun.dim_d() == 1);
  CHECK(p.fun.dim_n() == 4);
  CHECK(p.fun.is_affine());
  const CMatrix b1c1 = fixtures::example4_b().col(0) * fixtures::example4_c().row(0);
  CHECK((p.fun.coeff(1) - b1c1).norm() == 0.0);
  CHECK((p.fun.coeff(0) - fixtures::example4_a()).norm() == 0.0);
  CHECK(p.settings.method == Method::small);
  CHECK(p.box.dim() == 1);

  json two = feedback_manifest();
  two["feedback"]["slots"] = {{{"c_row", 1}, {"b_col", 1}}, {{"c_row", 2}, {"b_col", 2}, {"shift", 0.5}}};
  two["box"] = {{"lower", {-5.0, -5.0}}, {"upper", {5.0, 5.0}}};
  const Problem q = load_problem(write_manifest(dir, two));
  CHECK(q.fun.dim_d() == 2);
  const CMatrix b2c2 = fixtures::example4_b().col(1) * fixtures::example4_c().row(1);
  CHECK((q.fun.coeff(0) - (fixtures::example4_a() + 0.5 * b2c2)).norm() <= 1e-15);
  fs::remove_all(dir);
}

TEST_CASE("affine and custom-term manifests") {
  const fs::path dir = fresh_dir("affine");
  json names = json::array();
  for (int k = 0; k < 4; ++k) {
    const std::string f = "M" + std::to_string(k) + ".mtx";
    write_matrix_market((dir / f).string(), fixtures::random_stable(5, 10 + static_cast<std::uint64_t>(k), k == 2));
    names.push_back(f);
  }
  json j = {{"schema", kManifestSchema},
            {"family", "affine"},
            {"matrices", names},
            {"box", {{"lower", {-1, -1, -1}}, {"upper", {1, 1, 1}}}},
            {"method", "basic"},
            {"tolerances", {{"tol_gap", 1e-7}, {"max_iter", 9}}}};
  const Problem p = load_problem(write_manifest(dir, j));
  CHECK(p.fun.kappa() == 4);
  CHECK(p.fun.dim_d() == 3);
  CHECK(p.settings.method == Method::basic);
  CHECK(p.settings.tol_gap == 1e-7);
  CHECK(p.settings.max_iter == 9);

  json c = {{"schema", kManifestSchema},
            {"family", "custom-affine-terms"},
            {"terms",
             {{{"matrix", "M0.mtx"}, {"offset", 1.0}},
              {{"matrix", "M1.mtx"}, {"weights", {2.0, 0.0}}},
              {{"matrix", "M2.mtx"}, {"offset", 0.5}, {"weights", {0.0, -1.0}}}}},
            {"box", {{"lower", {-1, -1}}, {"upper", {1, 1}}}}};
  const Problem q = load_problem(write_manifest(dir, c));
  CHECK(q.fun.kappa() == 3);
  RVector x(2);
  x << 0.3, -0.4;
  const CMatrix expected = q.fun.coeff(0) + 0.6 * q.fun.coeff(1) + 0.9 * q.fun.coeff(2);
  CHECK((q.fun.eval_full(x) - expected).norm() <= 1e-14);
  fs::remove_all(dir);
}

TEST_CASE("dimension mismatches are listed together") {
  const fs::path dir = fresh_dir("mismatch");
  write_matrix_market((dir / "A.mtx").string(), fixtures::example4_a());
  write_matrix_market((dir / "B.mtx").string(), CMatrix::Ones(3, 2));
  write_matrix_market((dir / "C.mtx").string(), CMatrix::Ones(2, 5));
  json j = feedback_manifest();
  j["feedback"]["slots"] = {{{"c_row", 3}, {"b_col", 1}}};
  j["box"] = {{"lower", {0.0, 0.0}}, {"upper", {1.0, 1.0}}};
  const auto issues = issues_of(write_manifest(dir, j));
  CHECK(mentions(issues, "feedback.B is 3x2"));
  CHECK(mentions(issues, "feedback.C is 2x5"));
  CHECK(mentions(issues, "c_row 3"));
  CHECK(issues.size() >= 3);

  write_matrix_market((dir / "B.mtx").string(), fixtures::example4_b());
  write_matrix_market((dir / "C.mtx").string(), fixtures::example4_c());
  j["feedback"]["slots"] = {{{"c_row", 1}, {"b_col", 1}}};
  CHECK(mentions(issues_of(write_manifest(dir, j)), "box has dimension 2"));

  json bad = feedback_manifest();
  bad["method"] = "fastest";
  bad["schema"] = "other";
  const auto two = issues_of(write_manifest(dir, bad));
  CHECK(mentions(two, "method must be"));
  CHECK(mentions(two, "schema must be"));
  fs::remove_all(dir);
}

TEST_CASE("a malformed matrix file is reported with its line") {
  const fs::path dir = fresh_dir("malformed");
  std::ofstream(dir / "A.mtx") << "%%MatrixMarket matrix array real general\n% note\n4 four\n";
  write_matrix_market((dir / "B.mtx").string(), fixtures::example4_b());
  write_matrix_market((dir / "C.mtx").string(), fixtures::example4_c());
  const auto issues = issues_of(write_manifest(dir, feedback_manifest()));
  REQUIRE(issues.size() == 1);
  CHECK(mentions(issues, "A.mtx:3:"));

  std::ofstream(dir / "manifest.json") << "{ not json";
  CHECK(mentions(issues_of((dir / "manifest.json").string()), "invalid JSON"));
  fs::remove_all(dir);
}

TEST_CASE("benchmark generator normalization and determinism") {
  const fs::path dir = fresh_dir("bench");
  for (std::uint64_t seed : {1, 2, 3}) {
    const BenchResult r = gen_bench({.seed = seed, .n = 30}, (dir / "a").string());
    CHECK(std::abs(spectral_norm(r.a) - 10.0) <= 1e-8);
    CHECK(r.abscissa >= -0.31);
    CHECK(r.abscissa <= -0.23);
    CHECK(std::abs(r.b.norm() - std::sqrt(50.0)) <= 1e-12);
    CHECK(std::abs(r.c.norm() - std::sqrt(50.0)) <= 1e-12);

    const Problem p = load_problem(r.manifest_path);
    CHECK(std::abs(gamma_affine(p.fun) - 5000.0) <= 1e-6);
    CHECK((p.fun.eval_full(RVector::Zero(1)) - r.a).norm() <= 1e-12);
    CHECK(p.box.lower()(0) == -3.0);
    CHECK(p.box.upper()(0) == 3.0);

    gen_bench({.seed = seed, .n = 30}, (dir / "b").string());
    for (const char* f : {"A.mtx", "B.mtx", "C.mtx", "manifest.json"})
      CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }

  const BenchResult s = gen_bench({.seed = 4, .n = 20, .shift = -0.08, .box_lower = -0.2, .box_upper = 0.2},
                                  (dir / "s").string());
  const Problem p = load_problem(s.manifest_path);
  const CMatrix bc = s.b * s.c.transpose();
  CHECK((p.fun.eval_full(RVector::Constant(1, 0.05)) - (s.a + (0.05 - 0.08) * bc)).norm() <= 1e-12);
  CHECK(p.settings.method == Method::basic);
  fs::remove_all(dir);
}
