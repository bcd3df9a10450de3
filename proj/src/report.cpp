#include "distopt/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace distopt {

using nlohmann::ordered_json;

int RunReport::exit_code() const {
  if (status == "converged") return 0;
  if (status == "error") return 1;
  return 2;
}

std::string format12(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double round12(double v) {
  if (!std::isfinite(v)) return v;
  return std::strtod(format12(v).c_str(), nullptr);
}

std::vector<std::string> trace_columns(int d) {
  std::vector<std::string> cols{"iter", "basis_dim"};
  for (int i = 1; i <= d; ++i) cols.push_back("x" + std::to_string(i));
  for (const char* c : {"x_error", "z_re", "z_im", "gamma", "reduced_val", "full_val", "gap", "stable",
                        "full_evaluations"})
    cols.emplace_back(c);
  return cols;
}

std::string trace_csv(const RunReport& r) {
  const int d = static_cast<int>(r.x_best.size());
  std::ostringstream out;
  const auto cols = trace_columns(d);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const ReportRow& row : r.rows) {
    out << row.iter << ',' << row.basis_dim;
    for (int i = 0; i < d; ++i) out << ',' << (i < row.x.size() ? format12(row.x(i)) : "");
    out << ',' << (row.x_error ? format12(*row.x_error) : "");
    out << ',' << (row.z ? format12(row.z->real()) : "") << ',' << (row.z ? format12(row.z->imag()) : "");
    out << ',' << format12(row.gamma) << ',' << format12(row.reduced_val) << ',' << format12(row.full_val)
        << ',' << format12(row.gap) << ',' << (row.stable ? 1 : 0) << ',' << row.full_evaluations << '\n';
  }
  return out.str();
}

namespace {

ordered_json num(double v) {
  if (!std::isfinite(v)) return format12(v);
  return round12(v);
}

ordered_json vec(const RVector& x) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) a.push_back(num(x(i)));
  return a;
}

}  // namespace

std::string report_json(const RunReport& r, bool include_timings) {
  ordered_json j;
  j["schema"] = kReportSchema;
  j["method"] = r.method;
  j["status"] = r.status;
  j["exit_code"] = r.exit_code();
  if (!r.message.empty()) j["message"] = r.message;
  if (r.status == "error") j["error"] = {{"message", r.message}};
  j["x_best"] = vec(r.x_best);
  j["d_best"] = num(r.d_best);
  j["d_upper"] = num(r.d_upper);
  j["gap"] = num(r.gap);
  j["iterations"] = r.iterations;
  j["basis_dim"] = r.basis_dim;
  j["gamma"] = num(r.gamma);
  j["certified"] = r.certified;
  if (r.oracle) {
    const OracleSummary& o = *r.oracle;
    ordered_json oj;
    oj["value"] = num(o.value);
    oj["lower"] = num(o.lower);
    oj["upper"] = num(o.upper);
    oj["point"] = vec(o.point);
    oj["certified"] = o.certified;
    oj["evaluations"] = o.evaluations;
    if (o.x_error) oj["x_error"] = num(*o.x_error);
    if (o.value_error) oj["value_error"] = num(*o.value_error);
    j["oracle"] = oj;
  }
  if (include_timings) {
    j["timings"] = {{"reduced_seconds", num(r.reduced_seconds)},
                    {"full_seconds", num(r.full_seconds)},
                    {"total_seconds", num(r.total_seconds)}};
  }
  ordered_json rows = ordered_json::array();
  for (const ReportRow& row : r.rows) {
    ordered_json rj;
    rj["iter"] = row.iter;
    rj["basis_dim"] = row.basis_dim;
    rj["x"] = vec(row.x);
    rj["x_error"] = row.x_error ? num(*row.x_error) : ordered_json();
    rj["z"] = row.z ? ordered_json::array({num(row.z->real()), num(row.z->imag())}) : ordered_json();
    rj["gamma"] = num(row.gamma);
    rj["reduced_val"] = num(row.reduced_val);
    rj["full_val"] = num(row.full_val);
    rj["gap"] = num(row.gap);
    rj["stable"] = row.stable;
    rj["full_evaluations"] = row.full_evaluations;
    if (include_timings) {
      rj["reduced_seconds"] = num(row.reduced_seconds);
      rj["full_seconds"] = num(row.full_seconds);
    }
    rows.push_back(rj);
  }
  j["trace"] = rows;
  return j.dump(2) + "\n";
}

void write_report(const RunReport& r, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const auto put = [](const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + p.string());
  };
  put(fs::path(dir) / "report.json", report_json(r));
  put(fs::path(dir) / "trace.csv", trace_csv(r));
}

std::string error_json(const std::string& message) {
  ordered_json j;
  j["schema"] = kReportSchema;
  j["status"] = "error";
  j["exit_code"] = 1;
  j["error"] = {{"message", message}};
  return j.dump(2) + "\n";
}

}  // namespace distopt
