#pragma once

#include "jrsim/types.hpp"

#include <string>
#include <vector>

namespace jrsim {

// Minimal line-plot writer: fixed canvas, linear or log10 y, one polyline per
// series. Output is deterministic for identical inputs.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string x_label, std::string y_label,
          bool log_y = false);

  void add_series(const std::vector<Real>& x, const std::vector<Real>& y,
                  const std::string& color);

  std::string render() const;

 private:
  struct Series {
    std::vector<Real> x, y;
    std::string color;
  };
  std::string title_, x_label_, y_label_;
  bool log_y_;
  std::vector<Series> series_;
};

}  // namespace jrsim
