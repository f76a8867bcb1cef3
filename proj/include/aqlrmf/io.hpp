#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "aqlrmf/matrix.hpp"

namespace aqlrmf {

// CSV matrices: one row per line, comma-separated decimals, `NaN` (any case)
// marks a missing entry. Numbers are written with 17 significant digits.
MaskedMatrix parse_csv_matrix(std::string_view text);
MaskedMatrix read_csv_matrix(const std::string& path);
std::string format_csv_matrix(const MaskedMatrix& X);
std::string format_csv_matrix(const Matrix& values);
void write_csv_matrix(const std::string& path, const MaskedMatrix& X);
void write_csv_matrix(const std::string& path, const Matrix& values);

// Binary greyscale PGM (P5). Pixels are mapped to [0,1] by maxval on read and
// clamped then quantized to 8 bits on write.
Matrix read_pgm(std::istream& in);
Matrix read_pgm(const std::string& path);
void write_pgm(std::ostream& out, const Matrix& image);
void write_pgm(const std::string& path, const Matrix& image);

}  // namespace aqlrmf
