#pragma once

#include "jrsim/types.hpp"

#include <string>
#include <vector>

namespace jrsim {

// Single header row, comma separator, '.' decimal, SI base units throughout.
// Formatting is fixed ("%.12g", "inf" for infinities) so identical inputs
// serialize byte-identically.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns);

  void row(const std::vector<Real>& values);
  void raw_row(const std::vector<std::string>& cells);

  const std::string& str() const { return buf_; }

  static std::string format(Real v);

 private:
  std::size_t n_cols_;
  std::string buf_;
};

void write_file(const std::string& path, const std::string& content);

}  // namespace jrsim
