// Copyright 2026 The qloss Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef QLOSS_IO_HPP_
#define QLOSS_IO_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qloss/fock.hpp"
#include "qloss/numerics.hpp"

#ifndef QLOSS_VERSION
#define QLOSS_VERSION "0.0.0"
#endif

namespace qloss {

inline constexpr const char* kVersion = QLOSS_VERSION;

/// Twelve significant digits, shortest of fixed/scientific.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";  // folds -0 as well
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

/// Value rounded to twelve significant digits, for JSON emitters.
inline double round12(double x) {
  if (!std::isfinite(x) || x == 0.0) return x == 0.0 ? 0.0 : x;
  return std::stod(format_double(x));
}

/// Run record carried into every output header.
struct Provenance {
  std::string invocation;
  std::vector<std::pair<std::string, std::string>> config;
  std::string rng = kRngAlgorithm;
};

inline void write_comment_header(std::ostream& os, const Provenance& p, const char* prefix = "# ") {
  os << prefix << "qloss " << kVersion << '\n';
  os << prefix << "invocation: " << p.invocation << '\n';
  os << prefix << "config:";
  for (const auto& [k, v] : p.config) os << ' ' << k << '=' << v;
  os << '\n';
  os << prefix << "rng: " << p.rng << '\n';
}

/// Comma-separated table with a commented provenance header.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const Provenance& p, const std::vector<std::string>& columns) : os_(os) {
    write_comment_header(os_, p);
    row(columns);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
  }

 private:
  std::ostream& os_;
};

/// Dense complex matrix: one line per row, columns c<j>_re, c<j>_im.
inline void write_matrix_csv(std::ostream& os, const ComplexMatrix& m, const Provenance& p) {
  std::vector<std::string> cols = {"row"};
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    cols.push_back("c" + std::to_string(j) + "_re");
    cols.push_back("c" + std::to_string(j) + "_im");
  }
  CsvWriter w(os, p, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<std::string> cells = {std::to_string(i)};
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      cells.push_back(format_double(m(i, j).real()));
      cells.push_back(format_double(m(i, j).imag()));
    }
    w.row(cells);
  }
}

/// Nonzero density-matrix entries with states printed as n1|n2|...|nm.
inline void write_density_csv(std::ostream& os, const DensityMatrix& rho, const Provenance& p) {
  CsvWriter w(os, p, {"row_state", "col_state", "re", "im"});
  for (std::size_t i = 0; i < rho.space.dimension(); ++i) {
    for (std::size_t j = 0; j < rho.space.dimension(); ++j) {
      const Complex v = rho.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (v == Complex(0.0, 0.0)) continue;
      w.row({to_string(rho.space.state_at(i)), to_string(rho.space.state_at(j)), format_double(v.real()),
             format_double(v.imag())});
    }
  }
}

// -- SVG ---------------------------------------------------------------------

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// XML comments may not contain "--".
inline std::string comment_safe(std::string s) {
  for (std::size_t pos = s.find("--"); pos != std::string::npos; pos = s.find("--", pos)) s.replace(pos, 2, "- -");
  return s;
}

}  // namespace detail

/// Line plot with axes, tick labels at the data extremes and a legend.
inline void write_svg(std::ostream& os, const PlotSpec& plot, const Provenance& p) {
  constexpr double kW = 640, kH = 420, kL = 70, kR = 20, kT = 40, kB = 50;
  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : plot.series) {
    for (const auto& [x, y] : s.points) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  auto sx = [&](double x) { return kL + (x - x0) / (x1 - x0) * (kW - kL - kR); };
  auto sy = [&](double y) { return kH - kB - (y - y0) / (y1 - y0) * (kH - kT - kB); };

  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!--\n";
  std::ostringstream header;
  write_comment_header(header, p, "  ");
  os << detail::comment_safe(header.str()) << "-->\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
     << detail::xml_escape(plot.title) << "</text>\n";
  os << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kW - kR << "\" y2=\"" << kH - kB
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\"" << kH - kB << "\" stroke=\"black\"/>\n";
  const auto tick = [&](double x, double y, const char* anchor, double v) {
    os << "<text x=\"" << x << "\" y=\"" << y << "\" text-anchor=\"" << anchor << "\" font-size=\"11\">"
       << format_double(v) << "</text>\n";
  };
  tick(kL, kH - kB + 16, "start", x0);
  tick(kW - kR, kH - kB + 16, "end", x1);
  tick(kL - 4, kH - kB, "end", y0);
  tick(kL - 4, kT + 10, "end", y1);
  os << "<text x=\"" << (kL + kW - kR) / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\" font-size=\"13\">"
     << detail::xml_escape(plot.x_label) << "</text>\n";
  os << "<text x=\"16\" y=\"" << (kT + kH - kB) / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
     << (kT + kH - kB) / 2 << ")\">" << detail::xml_escape(plot.y_label) << "</text>\n";
  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const char* color = kColors[k % std::size(kColors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : plot.series[k].points) os << format_double(sx(x)) << ',' << format_double(sy(y)) << ' ';
    os << "\"/>\n";
    os << "<text x=\"" << kW - kR - 4 << "\" y=\"" << kT + 14 * (k + 1) << "\" text-anchor=\"end\" font-size=\"12\" fill=\""
       << color << "\">" << detail::xml_escape(plot.series[k].label) << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace qloss

#endif  // QLOSS_IO_HPP_
