#include "jrsim/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace jrsim {

CsvWriter::CsvWriter(std::vector<std::string> columns) : n_cols_(columns.size()) {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) buf_ += ',';
    buf_ += columns[i];
  }
  buf_ += '\n';
}

std::string CsvWriter::format(Real v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char tmp[32];
  std::snprintf(tmp, sizeof(tmp), "%.12g", v);
  return tmp;
}

void CsvWriter::row(const std::vector<Real>& values) {
  if (values.size() != n_cols_)
    throw ConfigError("CSV row width mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) buf_ += ',';
    buf_ += format(values[i]);
  }
  buf_ += '\n';
}

void CsvWriter::raw_row(const std::vector<std::string>& cells) {
  if (cells.size() != n_cols_)
    throw ConfigError("CSV row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) buf_ += ',';
    buf_ += cells[i];
  }
  buf_ += '\n';
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  f << content;
}

}  // namespace jrsim
