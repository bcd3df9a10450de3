#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "distopt/mmio.hpp"
#include "distopt/problem.hpp"
#include "distopt/report.hpp"
#include "distopt/run.hpp"
#include "distopt/stability.hpp"

using namespace distopt;

namespace {

int thread_count() {
  const char* env = std::getenv("DISTOPT_THREADS");
  if (env == nullptr) return 1;
  const int t = std::atoi(env);
  return t > 0 ? t : 1;
}

int finish(const RunReport& r, const std::string& out_dir) {
  write_report(r, out_dir);
  std::cout << "status " << r.status << "  D " << format12(r.d_best) << "  upper " << format12(r.d_upper)
            << "  iterations " << r.iterations << "\n";
  if (r.status == "error") std::cerr << "error: " << r.message << "\n";
  return r.exit_code();
}

int fail(const std::string& message) {
  std::cout << error_json(message);
  std::cerr << "error: " << message << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distance-to-instability computation and maximization over parameter boxes"};
  app.require_subcommand(1);

  std::string matrix_file;
  double dist_tol = 1e-8;
  auto* dist = app.add_subcommand("dist", "Distance to instability of one matrix (Matrix Market file)");
  dist->add_option("matrixfile", matrix_file, "Matrix Market file")->required();
  dist->add_option("--tol", dist_tol, "Level-set tolerance")->capture_default_str();

  std::string manifest, out_dir = "out", method;
  std::optional<double> tol_gap, gamma, tol;
  std::optional<int> max_iter;
  bool with_oracle = false;
  auto* maximize = app.add_subcommand("maximize", "Maximize the distance to instability over the box");
  maximize->add_option("manifest", manifest, "Problem manifest (JSON)")->required();
  maximize->add_option("--method", method, "small, basic, extended or uniform")
      ->check(CLI::IsMember({"small", "basic", "extended", "uniform"}));
  maximize->add_option("--tol-gap", tol_gap, "Gap tolerance of the subspace methods (default 1e-8)");
  maximize->add_option("--tol", tol, "Tolerance of method small (default 1e-8)");
  maximize->add_option("--max-iter", max_iter, "Outer iteration limit (default 50)");
  maximize->add_option("--gamma", gamma, "Override the curvature bound");
  maximize->add_option("--out", out_dir, "Output directory")->capture_default_str();
  maximize->add_flag("--with-oracle", with_oracle, "Also run the brute-force oracle and report errors");

  std::optional<int> steps;
  auto* oracle = app.add_subcommand("oracle", "Brute-force certified maximization (d <= 2)");
  oracle->add_option("manifest", manifest, "Problem manifest (JSON)")->required();
  oracle->add_option("--steps", steps, "Initial grid points per dimension (default 41)");
  oracle->add_option("--out", out_dir, "Output directory")->capture_default_str();

  BenchOptions bench_opts;
  std::string bench_out;
  std::string bench_method = "basic";
  auto* bench = app.add_subcommand("bench", "Generate a seeded rank-one feedback benchmark");
  bench->add_option("--seed", bench_opts.seed, "Random seed")->required();
  bench->add_option("--n", bench_opts.n, "Matrix order")->required()->check(CLI::PositiveNumber);
  bench->add_option("--out", bench_out, "Output directory")->required();
  bench->add_option("--shift", bench_opts.shift, "Gain offset: family A + (shift + k) b c^T")
      ->capture_default_str();
  bench->add_option("--lower", bench_opts.box_lower, "Lower gain bound")->capture_default_str();
  bench->add_option("--upper", bench_opts.box_upper, "Upper gain bound")->capture_default_str();
  bench->add_option("--method", bench_method, "Method recorded in the manifest")
      ->check(CLI::IsMember({"small", "basic", "extended", "uniform", "oracle"}))
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*dist) {
      const CMatrix m = read_matrix_market(matrix_file);
      if (m.rows() != m.cols() || m.rows() == 0) return fail(matrix_file + ": matrix must be square and nonempty");
      const DistResult r = distance_to_instability(m, dist_tol);
      nlohmann::ordered_json j;
      j["stable"] = r.stable;
      j["distance"] = round12(r.dist);
      j["z"] = {round12(r.z_star.real()), round12(r.z_star.imag())};
      j["abscissa"] = round12(spectral_abscissa_value(m));
      j["level_iterations"] = r.level_iterations;
      std::cout << j.dump(2) << "\n";
      return 0;
    }
    if (*maximize || *oracle) {
      Problem p = load_problem(manifest);
      if (*oracle) {
        p.settings.method = Method::oracle;
        if (steps) p.settings.oracle_steps = *steps;
      } else {
        if (!method.empty()) p.settings.method = *parse_method(method);
        if (p.settings.method == Method::oracle) return fail("use the oracle subcommand for method oracle");
        if (tol_gap) p.settings.tol_gap = *tol_gap;
        if (tol) p.settings.tol = *tol;
        if (max_iter) p.settings.max_iter = *max_iter;
        if (gamma) p.settings.gamma = *gamma;
      }
      RunOptions ro;
      ro.with_oracle = with_oracle;
      ro.threads = thread_count();
      return finish(run_problem(p, ro), out_dir);
    }
    if (*bench) {
      bench_opts.method = *parse_method(bench_method);
      const BenchResult br = gen_bench(bench_opts, bench_out);
      std::cout << br.manifest_path << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    return fail(e.what());
  }
  return 1;
}
