#include "abohm/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "abohm/common.hpp"

namespace abohm::report {

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

}  // namespace

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (i) out += ',';
    out += csv_field(t.header[i]);
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_field(row[i]);
    }
    out += '\n';
  }
  return out;
}

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

std::string line_chart_svg(const std::vector<Series>& series, const std::string& title,
                           const std::string& x_label, const std::string& y_label,
                           bool log_x) {
  const double W = 860, H = 480, L = 70, R = 840, T = 40, B = 430;
  double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      double x = s.x[i], y = s.y[i];
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (log_x) {
        if (x <= 0) continue;
        x = std::log10(x);
      }
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  if (x_lo > x_hi) {
    x_lo = 0;
    x_hi = 1;
  }
  if (y_lo > y_hi) {
    y_lo = 0;
    y_hi = 1;
  }
  if (x_hi - x_lo < 1e-12) {
    x_lo -= 0.5;
    x_hi += 0.5;
  }
  if (y_hi - y_lo < 1e-12) {
    y_lo -= 0.5;
    y_hi += 0.5;
  }
  double pad = 0.05 * (y_hi - y_lo);
  y_lo -= pad;
  y_hi += pad;

  auto px = [&](double x) { return L + (x - x_lo) / (x_hi - x_lo) * (R - L); };
  auto py = [&](double y) { return B - (y - y_lo) / (y_hi - y_lo) * (B - T); };

  std::ostringstream svg;
  svg.precision(7);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  svg << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" "
         "font-family=\"sans-serif\">"
      << title << "</text>\n";

  for (int i = 0; i <= 4; ++i) {
    double fx = x_lo + (x_hi - x_lo) * i / 4.0;
    double fy = y_lo + (y_hi - y_lo) * i / 4.0;
    svg << "<line x1=\"" << px(fx) << "\" y1=\"" << T << "\" x2=\"" << px(fx) << "\" y2=\"" << B
        << "\" stroke=\"#dddddd\"/>\n";
    svg << "<line x1=\"" << L << "\" y1=\"" << py(fy) << "\" x2=\"" << R << "\" y2=\"" << py(fy)
        << "\" stroke=\"#dddddd\"/>\n";
    double xv = log_x ? std::pow(10.0, fx) : fx;
    svg << "<text x=\"" << px(fx) << "\" y=\"" << B + 18
        << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">"
        << tick_label(xv) << "</text>\n";
    svg << "<text x=\"" << L - 6 << "\" y=\"" << py(fy) + 4
        << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" << tick_label(fy)
        << "</text>\n";
  }
  svg << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << R - L << "\" height=\"" << B - T
      << "\" fill=\"none\" stroke=\"#444444\"/>\n";
  svg << "<text x=\"" << (L + R) / 2 << "\" y=\"" << H - 12
      << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">" << x_label
      << "</text>\n";
  svg << "<text x=\"18\" y=\"" << (T + B) / 2
      << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\" "
         "transform=\"rotate(-90 18 "
      << (T + B) / 2 << ")\">" << y_label << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % 6];
    std::ostringstream path;
    bool pen_down = false;
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      double x = series[s].x[i], y = series[s].y[i];
      if (!std::isfinite(x) || !std::isfinite(y) || (log_x && x <= 0)) {
        pen_down = false;
        continue;
      }
      if (log_x) x = std::log10(x);
      path << (pen_down ? " L " : " M ") << px(x) << ' ' << py(y);
      pen_down = true;
    }
    svg << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.6\"/>\n";
    double ly = T + 16 + 16 * double(s);
    svg << "<line x1=\"" << R - 150 << "\" y1=\"" << ly - 4 << "\" x2=\"" << R - 126 << "\" y2=\""
        << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << R - 120 << "\" y=\"" << ly
        << "\" font-size=\"11\" font-family=\"sans-serif\">" << series[s].name << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    require(bool(f), "io-failure", "cannot open " + tmp);
    f.write(content.data(), std::streamsize(content.size()));
    require(bool(f), "io-failure", "short write to " + tmp);
  }
  require(std::rename(tmp.c_str(), path.c_str()) == 0, "io-failure",
          "cannot move " + tmp + " into place");
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(bool(f), "io-failure", "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string content_hash(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)h);
  return buf;
}

}  // namespace abohm::report
