#include "distopt/mmio.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace distopt {

MatrixMarketError::MatrixMarketError(const std::string& source, long line, const std::string& reason)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + reason), line_(line) {}

namespace {

enum class Field { real, integer, complex, pattern };
enum class Symmetry { general, symmetric, skew, hermitian };

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  // Next line that is neither a comment nor blank.
  bool next_data(std::string& line) {
    while (std::getline(in_, line)) {
      ++lineno_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '%' || blank(line)) continue;
      return true;
    }
    return false;
  }

  bool first(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++lineno_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  [[noreturn]] void fail(const std::string& reason) const { throw MatrixMarketError(source_, lineno_, reason); }

 private:
  std::istream& in_;
  std::string source_;
  long lineno_ = 0;
};

cplx read_value(std::istringstream& ss, Field field, const LineReader& lr) {
  if (field == Field::pattern) return cplx(1.0, 0.0);
  double re = 0.0, im = 0.0;
  if (!(ss >> re)) lr.fail("expected a numeric value");
  if (field == Field::complex && !(ss >> im)) lr.fail("expected an imaginary part");
  return cplx(re, im);
}

void expect_end(std::istringstream& ss, const LineReader& lr) {
  std::string rest;
  if (ss >> rest) lr.fail("unexpected trailing token '" + rest + "'");
}

void place(CMatrix& m, long i, long j, cplx v, Symmetry sym) {
  m(i, j) = v;
  if (i == j) return;
  switch (sym) {
    case Symmetry::general: break;
    case Symmetry::symmetric: m(j, i) = v; break;
    case Symmetry::skew: m(j, i) = -v; break;
    case Symmetry::hermitian: m(j, i) = std::conj(v); break;
  }
}

}  // namespace

CMatrix read_matrix_market(std::istream& in, const std::string& source) {
  LineReader lr(in, source);
  std::string line;
  if (!lr.first(line)) lr.fail("empty file");
  std::istringstream hs(line);
  std::string banner, object, format, field_s, sym_s;
  hs >> banner >> object >> format >> field_s >> sym_s;
  if (banner != "%%MatrixMarket") lr.fail("missing %%MatrixMarket banner");
  if (lower(object) != "matrix") lr.fail("unsupported object '" + object + "'");
  format = lower(format);
  if (format != "array" && format != "coordinate") lr.fail("unsupported format '" + format + "'");
  Field field;
  field_s = lower(field_s);
  if (field_s == "real") field = Field::real;
  else if (field_s == "integer") field = Field::integer;
  else if (field_s == "complex") field = Field::complex;
  else if (field_s == "pattern") field = Field::pattern;
  else lr.fail("unsupported field '" + field_s + "'");
  Symmetry sym;
  sym_s = lower(sym_s);
  if (sym_s == "general") sym = Symmetry::general;
  else if (sym_s == "symmetric") sym = Symmetry::symmetric;
  else if (sym_s == "skew-symmetric") sym = Symmetry::skew;
  else if (sym_s == "hermitian") sym = Symmetry::hermitian;
  else lr.fail("unsupported symmetry '" + sym_s + "'");
  if (format == "array" && field == Field::pattern) lr.fail("pattern field requires coordinate format");
  if (sym == Symmetry::hermitian && field != Field::complex) lr.fail("hermitian symmetry requires complex field");

  if (!lr.next_data(line)) lr.fail("missing size line");
  std::istringstream ss(line);
  long rows = 0, cols = 0, nnz = 0;
  if (!(ss >> rows >> cols)) lr.fail("malformed size line");
  if (format == "coordinate" && !(ss >> nnz)) lr.fail("malformed size line");
  expect_end(ss, lr);
  if (rows < 0 || cols < 0 || nnz < 0) lr.fail("negative size");
  if (sym != Symmetry::general && rows != cols) lr.fail("symmetric storage needs a square matrix");

  CMatrix m = CMatrix::Zero(rows, cols);
  if (format == "array") {
    // Column-major; symmetric variants list the lower triangle only.
    for (long j = 0; j < cols; ++j) {
      const long i0 = sym == Symmetry::general ? 0 : (sym == Symmetry::skew ? j + 1 : j);
      for (long i = i0; i < rows; ++i) {
        if (!lr.next_data(line)) lr.fail("unexpected end of data");
        std::istringstream es(line);
        const cplx v = read_value(es, field, lr);
        expect_end(es, lr);
        place(m, i, j, v, sym);
      }
    }
  } else {
    for (long k = 0; k < nnz; ++k) {
      if (!lr.next_data(line)) lr.fail("unexpected end of data");
      std::istringstream es(line);
      long i = 0, j = 0;
      if (!(es >> i >> j)) lr.fail("malformed entry indices");
      if (i < 1 || i > rows || j < 1 || j > cols) lr.fail("entry index out of range");
      const cplx v = read_value(es, field, lr);
      expect_end(es, lr);
      place(m, i - 1, j - 1, v, sym);
    }
  }
  if (lr.next_data(line)) lr.fail("extra data after the last entry");
  return m;
}

CMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MatrixMarketError(path, 0, "cannot open file");
  return read_matrix_market(in, path);
}

void write_matrix_market(std::ostream& out, const CMatrix& m) {
  const bool real = is_real(m);
  out << "%%MatrixMarket matrix array " << (real ? "real" : "complex") << " general\n";
  out << m.rows() << ' ' << m.cols() << '\n';
  char buf[64];
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (real) {
        std::snprintf(buf, sizeof buf, "%.17g\n", m(i, j).real());
      } else {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", m(i, j).real(), m(i, j).imag());
      }
      out << buf;
    }
}

void write_matrix_market(const std::string& path, const CMatrix& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_matrix_market(out, m);
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace distopt
