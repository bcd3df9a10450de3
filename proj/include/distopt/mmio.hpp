#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "distopt/linalg.hpp"

namespace distopt {

/// Parse failure; what() reads "<source>:<line>: <reason>".
class MatrixMarketError : public std::runtime_error {
 public:
  MatrixMarketError(const std::string& source, long line, const std::string& reason);
  long line() const { return line_; }

 private:
  long line_;
};

/// Reads `matrix` objects in array or coordinate layout with real, integer,
/// complex or pattern fields and general, symmetric, skew-symmetric or
/// hermitian symmetry.
CMatrix read_matrix_market(std::istream& in, const std::string& source);
CMatrix read_matrix_market(const std::string& path);

/// Dense array layout; the field is real when every entry has zero imaginary
/// part. Entries use 17 significant digits, so a read reproduces them exactly.
void write_matrix_market(std::ostream& out, const CMatrix& m);
void write_matrix_market(const std::string& path, const CMatrix& m);

}  // namespace distopt
