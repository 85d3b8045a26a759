#include "cvfad/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace cvfad::svg {

namespace {

constexpr int kLeft = 80, kRight = 30, kTop = 40, kBottom = 50;

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

std::vector<double> nice_ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step)
    ticks.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
  return ticks;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void settle(bool log) {
    if (!(lo <= hi)) lo = hi = log ? 1.0 : 0.0;
    if (hi - lo <= 0.0) {
      const double pad = log ? 0.0 : std::max(1.0, std::abs(lo) * 0.1);
      lo -= pad;
      hi += pad;
      if (log) {
        lo /= 10.0;
        hi *= 10.0;
      }
    }
  }
};

void render_panel(std::string& out, const Panel& p, int x0, int y0, int w, int h) {
  Range rx, ry;
  for (const auto& s : p.series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      if (p.log_x && !(s.x[i] > 0.0)) continue;
      rx.add(p.log_x ? std::log10(s.x[i]) : s.x[i]);
      ry.add(s.y[i]);
    }
  if (p.xlim) rx = {p.log_x ? std::log10(p.xlim->first) : p.xlim->first, p.log_x ? std::log10(p.xlim->second) : p.xlim->second};
  if (p.ylim) ry = {p.ylim->first, p.ylim->second};
  rx.settle(false);
  ry.settle(false);
  if (!p.ylim) {
    const double pad = 0.05 * (ry.hi - ry.lo);
    ry.lo -= pad;
    ry.hi += pad;
  }

  const auto px = [&](double x) { return x0 + (x - rx.lo) / (rx.hi - rx.lo) * w; };
  const auto py = [&](double y) { return y0 + h - (y - ry.lo) / (ry.hi - ry.lo) * h; };
  const auto tx = [&](double x) { return p.log_x ? std::log10(x) : x; };

  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"white\" stroke=\"#333\"/>\n", x0, y0, w, h);

  // grid and tick labels
  std::vector<std::pair<double, std::string>> xt;
  if (p.log_x) {
    for (double d = std::ceil(rx.lo); d <= std::floor(rx.hi); d += 1.0) xt.emplace_back(d, fmt::format("{:g}", std::pow(10.0, d)));
  } else {
    for (double t : nice_ticks(rx.lo, rx.hi)) xt.emplace_back(t, fmt::format("{:g}", t));
  }
  for (const auto& [t, label] : xt) {
    const double x = px(t);
    out += fmt::format("<line x1=\"{:.2f}\" y1=\"{}\" x2=\"{:.2f}\" y2=\"{}\" stroke=\"#ddd\"/>\n", x, y0, x, y0 + h);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n", x, y0 + h + 15, label);
  }
  for (double t : nice_ticks(ry.lo, ry.hi)) {
    const double y = py(t);
    out += fmt::format("<line x1=\"{}\" y1=\"{:.2f}\" x2=\"{}\" y2=\"{:.2f}\" stroke=\"#ddd\"/>\n", x0, y, x0 + w, y);
    out += fmt::format("<text x=\"{}\" y=\"{:.2f}\" font-size=\"11\" text-anchor=\"end\">{:g}</text>\n", x0 - 5, y + 4, t);
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n", x0 + w / 2, y0 + h + 32,
                     escape(p.xlabel));
  out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 {} {})\">{}</text>\n",
                     x0 - 55, y0 + h / 2, x0 - 55, y0 + h / 2, escape(p.ylabel));

  out += fmt::format("<clipPath id=\"c{}_{}\"><rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/></clipPath>\n", x0, y0, x0, y0, w, h);
  out += fmt::format("<g clip-path=\"url(#c{}_{})\">\n", x0, y0);
  for (const auto& v : p.vlines) {
    const double x = px(tx(v.x));
    out += fmt::format("<line x1=\"{:.2f}\" y1=\"{}\" x2=\"{:.2f}\" y2=\"{}\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n", x, y0, x,
                       y0 + h);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{}\" font-size=\"11\" fill=\"#555\">{}</text>\n", x + 3, y0 + 12, escape(v.label));
  }
  for (const auto& s : p.series) {
    const std::size_t n = std::min(s.x.size(), s.y.size());
    if (s.markers) {
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(s.y[i]) || (p.log_x && !(s.x[i] > 0.0))) continue;
        out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"2.5\" fill=\"{}\"/>\n", px(tx(s.x[i])), py(s.y[i]), s.color);
      }
      continue;
    }
    std::string pts;
    const auto flush = [&] {
      if (!pts.empty())
        out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\" points=\"{}\"/>\n", s.color, pts);
      pts.clear();
    };
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(s.y[i]) || (p.log_x && !(s.x[i] > 0.0))) {
        flush();
        continue;
      }
      pts += fmt::format("{:.2f},{:.2f} ", px(tx(s.x[i])), py(s.y[i]));
    }
    flush();
  }
  out += "</g>\n";

  // legend
  int ly = y0 + 8;
  for (const auto& s : p.series) {
    if (s.label.empty()) continue;
    out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n", x0 + w - 150, ly, s.color);
    out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"11\">{}</text>\n", x0 + w - 135, ly + 9, escape(s.label));
    ly += 15;
  }
}

}  // namespace

std::string palette(std::size_t i) {
  static const std::array<const char*, 10> colors{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return colors[i % colors.size()];
}

std::string ramp(double t) {
  t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0);
  const auto r = static_cast<int>(std::lround(40 + 200 * t));
  const auto b = static_cast<int>(std::lround(220 - 190 * t));
  return fmt::format("#{:02x}{:02x}{:02x}", r, 60, b);
}

std::string render(const Figure& fig) {
  const int h_total = kTop + static_cast<int>(fig.panels.size()) * (fig.panel_height + kBottom) + 10;
  std::string out;
  out += fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n", fig.width,
                     h_total, fig.width, h_total);
  out += "<!-- generated by cvfad bench-cli -->\n";
  out += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"#fafafa\"/>\n", fig.width, h_total);
  out += fmt::format("<text x=\"{}\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n", fig.width / 2, escape(fig.title));
  int y = kTop;
  for (const auto& p : fig.panels) {
    render_panel(out, p, kLeft, y, fig.width - kLeft - kRight, fig.panel_height);
    y += fig.panel_height + kBottom;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace cvfad::svg
