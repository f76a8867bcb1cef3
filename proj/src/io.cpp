#include "aqlrmf/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "aqlrmf/errors.hpp"

namespace aqlrmf {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_nan_token(std::string_view s) {
  return s.size() == 3 && std::tolower(static_cast<unsigned char>(s[0])) == 'n' &&
         std::tolower(static_cast<unsigned char>(s[1])) == 'a' &&
         std::tolower(static_cast<unsigned char>(s[2])) == 'n';
}

std::string location(int row, int col) {
  return "row " + std::to_string(row) + ", column " + std::to_string(col);
}

void append_number(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path);
}

int read_header_int(std::istream& in) {
  // Skips whitespace and '#' comments between header fields.
  int c = in.peek();
  while (in && (std::isspace(c) || c == '#')) {
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else {
      in.get();
    }
    c = in.peek();
  }
  int value = 0;
  if (!(in >> value)) throw ValidationError("PGM: malformed header");
  return value;
}

}  // namespace

MaskedMatrix parse_csv_matrix(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::vector<std::vector<bool>> observed;
  int line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (trim(line).empty()) {
      if (trim(text).empty()) break;  // trailing blank lines
      throw ParseError("CSV: empty line at row " + std::to_string(line_no), line_no, 0);
    }

    std::vector<double> values;
    std::vector<bool> mask;
    int col = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string_view token = trim(line.substr(start, comma - start));
      ++col;
      if (is_nan_token(token)) {
        values.push_back(std::nan(""));
        mask.push_back(false);
      } else {
        double v = 0.0;
        const char* first = token.data();
        const char* last = token.data() + token.size();
        if (!token.empty() && *first == '+') ++first;
        const auto res = std::from_chars(first, last, v);
        if (token.empty() || res.ec != std::errc() || res.ptr != last)
          throw ParseError("CSV: cannot parse '" + std::string(token) + "' at " +
                               location(line_no, col),
                           line_no, col);
        values.push_back(v);
        mask.push_back(true);
      }
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && values.size() != rows.front().size())
      throw ParseError("CSV: row " + std::to_string(line_no) + " has " +
                           std::to_string(values.size()) + " columns, expected " +
                           std::to_string(rows.front().size()),
                       line_no, col);
    rows.push_back(std::move(values));
    observed.push_back(std::move(mask));
  }
  if (rows.empty()) throw ParseError("CSV: empty input", 0, 0);

  const auto m = static_cast<Eigen::Index>(rows.size());
  const auto n = static_cast<Eigen::Index>(rows.front().size());
  Matrix values(m, n);
  Mask mask(m, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      values(i, j) = rows[i][j];
      mask(i, j) = observed[i][j];
    }
  return MaskedMatrix(std::move(values), std::move(mask));
}

MaskedMatrix read_csv_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv_matrix(buf.str());
}

std::string format_csv_matrix(const MaskedMatrix& X) {
  std::string out;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      if (j > 0) out.push_back(',');
      if (X.observed(i, j))
        append_number(out, X.values()(i, j));
      else
        out += "NaN";
    }
    out.push_back('\n');
  }
  return out;
}

std::string format_csv_matrix(const Matrix& values) {
  std::string out;
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (j > 0) out.push_back(',');
      append_number(out, values(i, j));
    }
    out.push_back('\n');
  }
  return out;
}

void write_csv_matrix(const std::string& path, const MaskedMatrix& X) {
  write_text(path, format_csv_matrix(X));
}

void write_csv_matrix(const std::string& path, const Matrix& values) {
  write_text(path, format_csv_matrix(values));
}

Matrix read_pgm(std::istream& in) {
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5')
    throw ValidationError("PGM: expected binary P5 magic");
  const int width = read_header_int(in);
  const int height = read_header_int(in);
  const int maxval = read_header_int(in);
  if (width <= 0 || height <= 0) throw ValidationError("PGM: bad dimensions");
  if (maxval <= 0 || maxval > 65535) throw ValidationError("PGM: maxval out of range");
  in.get();  // single whitespace before the raster

  const int bytes = maxval < 256 ? 1 : 2;
  std::vector<unsigned char> raster(static_cast<std::size_t>(width) * height * bytes);
  in.read(reinterpret_cast<char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
  if (in.gcount() != static_cast<std::streamsize>(raster.size()))
    throw ValidationError("PGM: truncated pixel data");

  Matrix image(height, width);
  std::size_t k = 0;
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      int v = raster[k++];
      if (bytes == 2) v = (v << 8) | raster[k++];
      image(i, j) = static_cast<double>(v) / maxval;
    }
  }
  return image;
}

Matrix read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_pgm(in);
}

void write_pgm(std::ostream& out, const Matrix& image) {
  out << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  std::vector<unsigned char> raster;
  raster.reserve(static_cast<std::size_t>(image.size()));
  for (Eigen::Index i = 0; i < image.rows(); ++i)
    for (Eigen::Index j = 0; j < image.cols(); ++j) {
      const double v = std::isnan(image(i, j)) ? 0.0 : std::clamp(image(i, j), 0.0, 1.0);
      raster.push_back(static_cast<unsigned char>(std::lround(v * 255.0)));
    }
  out.write(reinterpret_cast<const char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
}

void write_pgm(const std::string& path, const Matrix& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_pgm(out, image);
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace aqlrmf
