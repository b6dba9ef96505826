#include "artsim/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

namespace artsim {

namespace {

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

void write_ablation_svg(std::ostream& out, const AblationResult& result,
                        const std::string& title) {
  // Series in first-appearance order.
  std::vector<std::string> series;
  std::set<std::uint32_t> layer_set;
  double y_max = 0.0;
  for (const auto& a : result.aggregates) {
    if (std::find(series.begin(), series.end(), a.features) == series.end())
      series.push_back(a.features);
    layer_set.insert(a.layers);
    y_max = std::max(y_max, a.mean + a.stddev);
  }
  if (series.empty() || layer_set.empty()) {
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='200' height='40'>"
           "<text x='10' y='25'>no data</text></svg>\n";
    return;
  }
  y_max = std::max(0.1, std::ceil(y_max * 10.0 + 0.5) / 10.0);
  y_max = std::min(y_max, 1.0);
  const std::vector<std::uint32_t> layers(layer_set.begin(), layer_set.end());
  const double x_lo = layers.front(), x_hi = layers.back();

  const double W = 720, H = 480;
  const double L = 64, R = 170, T = 36, B = 48;
  const double plot_w = W - L - R, plot_h = H - T - B;
  auto sx = [&](double layer) {
    return x_hi > x_lo ? L + (layer - x_lo) / (x_hi - x_lo) * plot_w : L + plot_w / 2;
  };
  auto sy = [&](double v) { return T + (1.0 - v / y_max) * plot_h; };

  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
      << "' font-family='sans-serif' font-size='12'>\n";
  out << "<text x='" << L << "' y='20' font-size='14'>" << title << "</text>\n";
  out << "<rect x='" << L << "' y='" << T << "' width='" << plot_w << "' height='"
      << plot_h << "' fill='none' stroke='#333'/>\n";

  for (double v = 0.0; v <= y_max + 1e-9; v += 0.1) {
    const double y = sy(v);
    out << "<line x1='" << L << "' y1='" << y << "' x2='" << L + plot_w << "' y2='" << y
        << "' stroke='#ddd'/>\n";
    out << "<text x='" << L - 8 << "' y='" << y + 4
        << "' text-anchor='end'>" << num(v) << "</text>\n";
  }
  for (auto l : layers) {
    const double x = sx(l);
    out << "<line x1='" << x << "' y1='" << T + plot_h << "' x2='" << x << "' y2='"
        << T + plot_h + 5 << "' stroke='#333'/>\n";
    out << "<text x='" << x << "' y='" << T + plot_h + 20 << "' text-anchor='middle'>"
        << l << "</text>\n";
  }
  out << "<text x='" << L + plot_w / 2 << "' y='" << H - 10
      << "' text-anchor='middle'>graph layers</text>\n";
  out << "<text x='16' y='" << T + plot_h / 2
      << "' text-anchor='middle' transform='rotate(-90 16 " << T + plot_h / 2
      << ")'>mean NDCG</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof kPalette / sizeof *kPalette)];
    std::string points;
    for (auto l : layers) {
      const AblationAggregate* a = nullptr;
      for (const auto& cand : result.aggregates)
        if (cand.features == series[s] && cand.layers == l) a = &cand;
      if (!a) continue;
      const double x = sx(l), y = sy(a->mean);
      points += num(x) + "," + num(y) + " ";
      const double y0 = sy(std::max(0.0, a->mean - a->stddev));
      const double y1 = sy(std::min(y_max, a->mean + a->stddev));
      out << "<line x1='" << x << "' y1='" << y0 << "' x2='" << x << "' y2='" << y1
          << "' stroke='" << color << "' stroke-width='1'/>\n";
      out << "<line x1='" << x - 3 << "' y1='" << y0 << "' x2='" << x + 3 << "' y2='" << y0
          << "' stroke='" << color << "'/>\n";
      out << "<line x1='" << x - 3 << "' y1='" << y1 << "' x2='" << x + 3 << "' y2='" << y1
          << "' stroke='" << color << "'/>\n";
      out << "<circle cx='" << x << "' cy='" << y << "' r='3' fill='" << color << "'/>\n";
    }
    if (!points.empty())
      out << "<polyline points='" << points << "' fill='none' stroke='" << color
          << "' stroke-width='1.5'/>\n";
    const double ly = T + 14 + 18 * static_cast<double>(s);
    out << "<line x1='" << W - R + 12 << "' y1='" << ly - 4 << "' x2='" << W - R + 34
        << "' y2='" << ly - 4 << "' stroke='" << color << "' stroke-width='2'/>\n";
    out << "<text x='" << W - R + 40 << "' y='" << ly << "'>" << series[s] << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error("SVG write failed");
}

void write_ablation_svg_file(const std::string& path, const AblationResult& result,
                             const std::string& title) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_ablation_svg(f, result, title);
}

}  // namespace artsim
