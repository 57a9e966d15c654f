#include "learnafe/io/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace learnafe::io {

namespace {

constexpr double kWidth = 800, kHeight = 500;
constexpr double kLeft = 70, kRight = 160, kTop = 40, kBottom = 50;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return palette[i % 10];
}

void header(std::ostringstream& os, const std::string& title, const std::string& xl,
            const std::string& yl) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
     << escape(title) << "</text>\n";
  os << "<text x=\"" << kLeft + (kWidth - kLeft - kRight) / 2 << "\" y=\"" << kHeight - 12
     << "\" text-anchor=\"middle\">" << escape(xl) << "</text>\n";
  os << "<text transform=\"translate(18," << kTop + (kHeight - kTop - kBottom) / 2
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(yl) << "</text>\n";
}

}  // namespace

std::string render_line_plot(const LinePlot& plot) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  auto tx = [&](double x) { return plot.log_x ? std::log10(x) : x; };
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || (plot.log_x && s.x[i] <= 0)) continue;
      xmin = std::min(xmin, tx(s.x[i]));
      xmax = std::max(xmax, tx(s.x[i]));
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (!(xmax > xmin)) { xmin = std::isfinite(xmin) ? xmin - 1 : 0; xmax = xmin + 2; }
  if (!(ymax > ymin)) { ymin = std::isfinite(ymin) ? ymin - 1 : 0; ymax = ymin + 2; }
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (tx(x) - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };

  std::ostringstream os;
  os.precision(6);
  header(os, plot.title, plot.x_label, plot.y_label);
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = xmin + (xmax - xmin) * k / 4.0;
    const double fy = ymin + (ymax - ymin) * k / 4.0;
    const double xv = plot.log_x ? std::pow(10.0, fx) : fx;
    os << "<text x=\"" << kLeft + pw * k / 4.0 << "\" y=\"" << kTop + ph + 16
       << "\" text-anchor=\"middle\">" << xv << "</text>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + ph * (1 - k / 4.0) + 4
       << "\" text-anchor=\"end\">" << fy << "</text>\n";
  }
  for (std::size_t i = 0; i < plot.series.size(); ++i) {
    const auto& s = plot.series[i];
    os << "<polyline class=\"series\" data-name=\"" << escape(s.name) << "\" fill=\"none\" stroke=\""
       << color(i) << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t j = 0; j < std::min(s.x.size(), s.y.size()); ++j) {
      if (!std::isfinite(s.x[j]) || !std::isfinite(s.y[j]) || (plot.log_x && s.x[j] <= 0)) continue;
      os << px(s.x[j]) << ',' << py(s.y[j]) << ' ';
    }
    os << "\"/>\n";
    const double ly = kTop + 14.0 * static_cast<double>(i);
    os << "<line x1=\"" << kWidth - kRight + 10 << "\" y1=\"" << ly << "\" x2=\""
       << kWidth - kRight + 30 << "\" y2=\"" << ly << "\" stroke=\"" << color(i) << "\"/>\n";
    os << "<text x=\"" << kWidth - kRight + 34 << "\" y=\"" << ly + 4 << "\">" << escape(s.name)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string render_heatmap(const Array2D<double>& values, const std::string& title,
                           const std::string& x_label, const std::string& y_label) {
  double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
  for (double v : values.data()) {
    if (!std::isfinite(v)) continue;
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  if (!(vmax > vmin)) vmax = vmin + 1.0;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const double cw = values.cols() ? pw / static_cast<double>(values.cols()) : pw;
  const double ch = values.rows() ? ph / static_cast<double>(values.rows()) : ph;

  std::ostringstream os;
  os.precision(6);
  header(os, title, x_label, y_label);
  os << "<g class=\"heatmap\" data-rows=\"" << values.rows() << "\" data-cols=\"" << values.cols()
     << "\">\n";
  for (std::size_t r = 0; r < values.rows(); ++r) {
    for (std::size_t c = 0; c < values.cols(); ++c) {
      const double v = values(r, c);
      const double t = std::isfinite(v) ? (v - vmin) / (vmax - vmin) : 0.0;
      // dark blue -> yellow
      const int red = static_cast<int>(255 * t);
      const int green = static_cast<int>(40 + 200 * t);
      const int blue = static_cast<int>(120 * (1 - t));
      os << "<rect class=\"cell\" x=\"" << kLeft + cw * static_cast<double>(c) << "\" y=\""
         << kTop + ph - ch * static_cast<double>(r + 1) << "\" width=\"" << cw << "\" height=\""
         << ch << "\" fill=\"rgb(" << red << ',' << green << ',' << blue << ")\"/>\n";
    }
  }
  os << "</g>\n";
  os << "<text x=\"" << kWidth - kRight + 10 << "\" y=\"" << kTop + 10 << "\">max " << vmax
     << "</text>\n";
  os << "<text x=\"" << kWidth - kRight + 10 << "\" y=\"" << kTop + 26 << "\">min " << vmin
     << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace learnafe::io
