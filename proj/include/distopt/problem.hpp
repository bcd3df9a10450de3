#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "distopt/matmodel.hpp"

namespace distopt {

inline constexpr const char* kManifestSchema = "distopt-manifest/1";

/// Manifest problems; what() lists every problem found, one per line.
class ProblemError : public std::runtime_error {
 public:
  explicit ProblemError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

enum class Method { small, basic, extended, uniform, oracle };

std::string to_string(Method m);
std::optional<Method> parse_method(const std::string& s);

struct RunSettings {
  Method method = Method::small;
  double tol = 1e-8;
  double tol_gap = 1e-8;
  int max_iter = 50;
  /// Iteration cap of a support-function maximization (method small, and
  /// each reduced problem of the subspace methods).
  int model_max_iter = 5000;
  double inner_tol = 1e-10;
  std::optional<double> gamma;
  double gamma_multiplier = 1.0;
  int oracle_steps = 41;
  double oracle_tol = 1e-6;
  double oracle_value_tol = 1e-6;
  long oracle_max_evaluations = 20000;
  std::uint64_t seed = 0;
};

struct Problem {
  ParamMatrixFun fun;
  Box box;
  RunSettings settings;
  std::string family;
};

/// Gain slot of A + Σⱼ (shiftⱼ + kⱼ)·b_{b_col} c_{c_row}ᵀ; indices are 1-based
/// in the manifest and 0-based here.
struct GainSlot {
  int c_row = 0;
  int b_col = 0;
  double shift = 0.0;
};

/// Loads a JSON manifest; relative matrix paths resolve against its directory.
Problem load_problem(const std::string& manifest_path);

/// Builds A + Σⱼ (shiftⱼ + xⱼ) b_{b_col} c_{c_row}ᵀ.
ParamMatrixFun feedback_family(const CMatrix& a, const CMatrix& b, const CMatrix& c,
                               const std::vector<GainSlot>& slots);

struct BenchOptions {
  std::uint64_t seed = 1;
  int n = 200;
  /// Gain offset: the family is A + (shift + k)·bcᵀ.
  double shift = 0.0;
  double box_lower = -3.0;
  double box_upper = 3.0;
  double target_abscissa = -0.27;
  Method method = Method::basic;
};

struct BenchResult {
  std::string manifest_path;
  CMatrix a;  // normalized, before the gain offset
  CVector b;
  CVector c;
  double abscissa = 0.0;
  double identity_shift = 0.0;  // t in A₀ − tI before scaling
};

/// Gaussian A, b, c from the seed; A is shifted by a multiple of I and scaled
/// to ‖A‖₂ = 10 so that its spectral abscissa hits target_abscissa;
/// ‖b‖₂ = ‖c‖₂ = √50. Writes A.mtx, B.mtx, C.mtx and manifest.json to out_dir.
BenchResult gen_bench(const BenchOptions& opts, const std::string& out_dir);

}  // namespace distopt
