#include "ripless/matrix_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <regex>
#include <sstream>

namespace ripless::io {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_matrix_csv(std::ostream& out, const ComplexMatrix& M, Field field) {
  out << "# field=" << to_string(field) << ", m=" << M.rows() << ", n=" << M.cols() << "\n";
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (j) out << ',';
      out << format_double(M(i, j).real());
      if (field == Field::Complex) out << ',' << format_double(M(i, j).imag());
    }
    out << '\n';
  }
}

void write_matrix_csv(std::ostream& out, const MeasurementMatrix& A) {
  write_matrix_csv(out, A.entries(), A.field());
}

namespace {

struct Header {
  Field field;
  Index m;
  Index n;
};

Header read_header(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("matrix csv: missing header");
  static const std::regex pattern(
      R"(^#\s*field\s*=\s*(real|complex)\s*,\s*m\s*=\s*(\d+)\s*,\s*n\s*=\s*(\d+)\s*$)");
  std::smatch match;
  if (!std::regex_match(line, match, pattern))
    throw InvalidArgument("matrix csv: malformed header '" + line + "'");
  return {field_from_string(match[1]), std::stoll(match[2]), std::stoll(match[3])};
}

double parse_double(const std::string& token) {
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(token.c_str(), &end);
  while (end && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
  if (token.empty() || errno == ERANGE || end == token.c_str() || *end != '\0')
    throw InvalidArgument("matrix csv: bad number '" + token + "'");
  return value;
}

ComplexMatrix read_body(std::istream& in, const Header& h) {
  const Index width = h.field == Field::Complex ? 2 * h.n : h.n;
  ComplexMatrix M(h.m, h.n);
  std::string line;
  for (Index i = 0; i < h.m; ++i) {
    if (!std::getline(in, line)) throw InvalidArgument("matrix csv: too few rows");
    std::stringstream row(line);
    std::string token;
    Index count = 0;
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(width));
    while (std::getline(row, token, ',')) {
      values.push_back(parse_double(token));
      ++count;
    }
    if (count != width) throw InvalidArgument("matrix csv: wrong number of columns");
    for (Index j = 0; j < h.n; ++j) {
      if (h.field == Field::Complex) {
        M(i, j) = Complex(values[static_cast<std::size_t>(2 * j)],
                          values[static_cast<std::size_t>(2 * j + 1)]);
      } else {
        M(i, j) = Complex(values[static_cast<std::size_t>(j)], 0.0);
      }
    }
  }
  return M;
}

}  // namespace

MeasurementMatrix read_matrix_csv(std::istream& in) {
  const Header h = read_header(in);
  return MeasurementMatrix(read_body(in, h), h.field, 1.0, {"csv", 0});
}

MeasurementMatrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  return read_matrix_csv(in);
}

void save_matrix_csv(const std::string& path, const MeasurementMatrix& A) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  write_matrix_csv(out, A);
}

void write_vector_csv(std::ostream& out, const MeasurementVector& y) {
  write_matrix_csv(out, ComplexMatrix(y.entries()), y.field());
}

MeasurementVector read_vector_csv(std::istream& in) {
  const Header h = read_header(in);
  if (h.n != 1) throw InvalidArgument("vector csv: expected n=1");
  ComplexMatrix M = read_body(in, h);
  return MeasurementVector(M.col(0), h.field);
}

}  // namespace ripless::io
