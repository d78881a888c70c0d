#pragma once

#include "ripless/types.hpp"

#include <iosfwd>
#include <string>

namespace ripless::io {

// CSV layout:
//
//   # field=real, m=<rows>, n=<cols>
//   v11,v12,...,v1n
//   ...
//
// Complex matrices use two adjacent columns per entry (real part, imaginary
// part), so each data line has 2n fields. Values are printed with 17
// significant digits, which round-trips every double exactly.

void write_matrix_csv(std::ostream& out, const ComplexMatrix& M, Field field);
void write_matrix_csv(std::ostream& out, const MeasurementMatrix& A);
MeasurementMatrix read_matrix_csv(std::istream& in);
MeasurementMatrix read_matrix_csv(const std::string& path);
void save_matrix_csv(const std::string& path, const MeasurementMatrix& A);

/// Vectors are stored as n=1 matrices.
void write_vector_csv(std::ostream& out, const MeasurementVector& y);
MeasurementVector read_vector_csv(std::istream& in);

std::string format_double(double value);

}  // namespace ripless::io
