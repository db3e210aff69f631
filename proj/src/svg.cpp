#include "jrsim/svg.hpp"

#include "jrsim/csv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace jrsim {

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label, bool log_y)
    : title_(std::move(title)), x_label_(std::move(x_label)),
      y_label_(std::move(y_label)), log_y_(log_y) {}

void SvgPlot::add_series(const std::vector<Real>& x, const std::vector<Real>& y,
                         const std::string& color) {
  if (x.size() != y.size()) throw ConfigError("SVG series length mismatch");
  series_.push_back({x, y, color});
}

std::string SvgPlot::render() const {
  constexpr int W = 720, H = 480, ML = 70, MR = 20, MT = 40, MB = 50;
  Real xmin = std::numeric_limits<Real>::infinity(), xmax = -xmin;
  Real ymin = xmin, ymax = -xmin;
  for (const auto& s : series_) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      Real yv = s.y[i];
      if (log_y_) {
        if (yv <= 0 || !std::isfinite(yv)) continue;
        yv = std::log10(yv);
      }
      if (!std::isfinite(yv) || !std::isfinite(s.x[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, yv);
      ymax = std::max(ymax, yv);
    }
  }
  if (!(xmax > xmin)) { xmin -= 0.5; xmax += 0.5; }
  if (!(ymax > ymin)) { ymin -= 0.5; ymax += 0.5; }

  auto px = [&](Real x) { return ML + (x - xmin) / (xmax - xmin) * (W - ML - MR); };
  auto py = [&](Real y) { return H - MB - (y - ymin) / (ymax - ymin) * (H - MT - MB); };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(W) +
         "\" height=\"" + std::to_string(H) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + std::to_string(W / 2) + "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">" + title_ + "</text>\n";
  out += "<line x1=\"" + std::to_string(ML) + "\" y1=\"" + std::to_string(H - MB) +
         "\" x2=\"" + std::to_string(W - MR) + "\" y2=\"" + std::to_string(H - MB) +
         "\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + std::to_string(ML) + "\" y1=\"" + std::to_string(MT) +
         "\" x2=\"" + std::to_string(ML) + "\" y2=\"" + std::to_string(H - MB) +
         "\" stroke=\"black\"/>\n";

  for (int t = 0; t <= 4; ++t) {
    Real fx = xmin + (xmax - xmin) * t / 4.0;
    Real fy = ymin + (ymax - ymin) * t / 4.0;
    out += "<text x=\"" + CsvWriter::format(px(fx)) + "\" y=\"" + std::to_string(H - MB + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           CsvWriter::format(fx) + "</text>\n";
    std::string lab = log_y_ ? ("1e" + CsvWriter::format(fy)) : CsvWriter::format(fy);
    out += "<text x=\"" + std::to_string(ML - 8) + "\" y=\"" + CsvWriter::format(py(fy) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + lab +
           "</text>\n";
  }
  out += "<text x=\"" + std::to_string((ML + W - MR) / 2) + "\" y=\"" + std::to_string(H - 10) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
         x_label_ + "</text>\n";
  out += "<text x=\"16\" y=\"" + std::to_string((MT + H - MB) / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
         "transform=\"rotate(-90 16 " + std::to_string((MT + H - MB) / 2) + ")\">" +
         y_label_ + "</text>\n";

  for (const auto& s : series_) {
    std::string pts;
    bool open = false;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      Real yv = s.y[i];
      if (log_y_) {
        if (yv <= 0 || !std::isfinite(yv)) { open = false; continue; }
        yv = std::log10(yv);
      }
      if (!std::isfinite(yv) || !std::isfinite(s.x[i])) { open = false; continue; }
      if (!open && !pts.empty()) {
        out += "<polyline fill=\"none\" stroke=\"" + s.color +
               "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        pts.clear();
      }
      pts += CsvWriter::format(px(s.x[i])) + "," + CsvWriter::format(py(yv)) + " ";
      open = true;
    }
    if (!pts.empty())
      out += "<polyline fill=\"none\" stroke=\"" + s.color +
             "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace jrsim
