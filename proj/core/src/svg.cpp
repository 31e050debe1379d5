#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "refsel/reports.hpp"

namespace refsel {

namespace {

constexpr int kCell = 64;
constexpr int kMargin = 110;

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

void open_svg(std::ostringstream& out, int width, int height, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"monospace\" font-size=\"12\">\n";
  out << "<text x=\"10\" y=\"18\" font-size=\"14\">" << esc(title) << "</text>\n";
}

}  // namespace

std::string svg_confusion_heatmap(const std::vector<std::vector<std::size_t>>& confusion,
                                  const std::vector<std::string>& class_names,
                                  const std::string& title) {
  const int k = static_cast<int>(confusion.size());
  std::size_t hi = 1;
  for (const auto& row : confusion)
    for (std::size_t v : row) hi = std::max(hi, v);
  std::ostringstream out;
  open_svg(out, kMargin + k * kCell + 20, kMargin + k * kCell + 20, title);
  for (int c = 0; c < k; ++c) {
    out << "<text x=\"" << kMargin + c * kCell + kCell / 2 << "\" y=\"" << kMargin - 10
        << "\" text-anchor=\"middle\">" << esc(class_names[c]) << "</text>\n";
    out << "<text x=\"" << kMargin - 8 << "\" y=\"" << kMargin + c * kCell + kCell / 2 + 4
        << "\" text-anchor=\"end\">" << esc(class_names[c]) << "</text>\n";
  }
  for (int g = 0; g < k; ++g) {
    for (int p = 0; p < k; ++p) {
      const double frac = static_cast<double>(confusion[g][p]) / hi;
      const int shade = static_cast<int>(255 - 205 * frac);
      out << "<rect x=\"" << kMargin + p * kCell << "\" y=\"" << kMargin + g * kCell
          << "\" width=\"" << kCell << "\" height=\"" << kCell << "\" fill=\"rgb(" << shade << ","
          << shade << ",255)\" stroke=\"black\"/>\n";
      out << "<text x=\"" << kMargin + p * kCell + kCell / 2 << "\" y=\""
          << kMargin + g * kCell + kCell / 2 + 4 << "\" text-anchor=\"middle\">"
          << confusion[g][p] << "</text>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

std::string svg_bar_chart(const std::vector<std::string>& names,
                          const std::vector<double>& values, const std::string& title) {
  const int n = static_cast<int>(names.size());
  const int bar_height = 22, gap = 8, plot_width = 420;
  double hi = 1e-12;
  for (double v : values) hi = std::max(hi, std::abs(v));
  std::ostringstream out;
  open_svg(out, kMargin + plot_width + 140, 40 + n * (bar_height + gap) + 20, title);
  for (int i = 0; i < n; ++i) {
    const int y = 40 + i * (bar_height + gap);
    const double w = plot_width * std::abs(values[i]) / hi;
    out << "<text x=\"" << kMargin - 8 << "\" y=\"" << y + bar_height / 2 + 4
        << "\" text-anchor=\"end\">" << esc(names[i]) << "</text>\n";
    out << "<rect x=\"" << kMargin << "\" y=\"" << y << "\" width=\"" << num(w) << "\" height=\""
        << bar_height << "\" fill=\"" << (values[i] >= 0 ? "steelblue" : "indianred")
        << "\"/>\n";
    out << "<text x=\"" << kMargin + w + 6 << "\" y=\"" << y + bar_height / 2 + 4 << "\">"
        << num(values[i]) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string svg_box_plot(const std::vector<std::string>& names,
                         const std::vector<std::vector<double>>& samples,
                         const std::string& title) {
  const int n = static_cast<int>(names.size());
  const int row_height = 34, plot_width = 420;
  double lo = 0.0, hi = 0.0;
  for (const auto& s : samples) {
    for (double v : s) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (hi - lo < 1e-12) hi = lo + 1e-12;
  auto sx = [&](double v) { return kMargin + plot_width * (v - lo) / (hi - lo); };
  std::ostringstream out;
  open_svg(out, kMargin + plot_width + 60, 40 + n * row_height + 20, title);
  out << "<line x1=\"" << num(sx(0.0)) << "\" y1=\"30\" x2=\"" << num(sx(0.0)) << "\" y2=\""
      << 40 + n * row_height << "\" stroke=\"gray\" stroke-dasharray=\"4\"/>\n";
  for (int i = 0; i < n; ++i) {
    std::vector<double> s = samples[i];
    std::sort(s.begin(), s.end());
    auto q = [&](double p) {
      const double idx = p * (s.size() - 1);
      const std::size_t a = static_cast<std::size_t>(idx);
      const double frac = idx - a;
      return a + 1 < s.size() ? s[a] * (1 - frac) + s[a + 1] * frac : s[a];
    };
    const double q1 = q(0.25), q2 = q(0.5), q3 = q(0.75);
    const int y = 40 + i * row_height, h = row_height - 12;
    out << "<text x=\"" << kMargin - 8 << "\" y=\"" << y + h / 2 + 4
        << "\" text-anchor=\"end\">" << esc(names[i]) << "</text>\n";
    out << "<line x1=\"" << num(sx(s.front())) << "\" y1=\"" << y + h / 2 << "\" x2=\""
        << num(sx(s.back())) << "\" y2=\"" << y + h / 2 << "\" stroke=\"black\"/>\n";
    out << "<rect x=\"" << num(sx(q1)) << "\" y=\"" << y << "\" width=\""
        << num(std::max(1.0, sx(q3) - sx(q1))) << "\" height=\"" << h
        << "\" fill=\"lightsteelblue\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << num(sx(q2)) << "\" y1=\"" << y << "\" x2=\"" << num(sx(q2))
        << "\" y2=\"" << y + h << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace refsel
