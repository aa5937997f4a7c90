#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tilefreq/tiling.hpp"

namespace tilefreq {

struct RenderSpec {
  std::map<std::string, std::string> colors;  // label -> fill; missing labels get a palette color
  double stroke = 0.02;                         // in tiling units
  double scale = 40;                            // pixels per unit
  std::vector<Patch> highlight;                 // patches drawn with a thick outline
};

namespace detail {

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                 "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};
  return colors[i % (sizeof(colors) / sizeof(colors[0]))];
}

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

}  // namespace detail

/// SVG 1.1 drawing of a patch: one <polygon> per tile in d = 2, a labeled
/// ruler strip of <rect> cells in d = 1.
inline std::string render_svg(const Prototiles& protos, const Patch& patch, const RenderSpec& spec = {}) {
  auto fill = [&](int proto) {
    const auto& label = protos[proto].label;
    auto it = spec.colors.find(label);
    return it != spec.colors.end() ? it->second : std::string(detail::palette(static_cast<std::size_t>(proto)));
  };
  double x0 = std::numeric_limits<double>::max(), x1 = -x0, y0 = x0, y1 = -x0;
  std::vector<std::vector<std::array<double, 2>>> shapes;
  for (const auto& t : patch.tiles) {
    auto s = tile_support(protos, t);
    std::vector<std::array<double, 2>> pts;
    for (const auto& v : s.verts) pts.push_back({v[0].to_double(), protos.dim == 2 ? v[1].to_double() : 0.0});
    for (auto& p : pts) {
      x0 = std::min(x0, p[0]);
      x1 = std::max(x1, p[0]);
      y0 = std::min(y0, p[1]);
      y1 = std::max(y1, p[1]);
    }
    shapes.push_back(std::move(pts));
  }
  if (patch.empty()) x0 = x1 = y0 = y1 = 0;
  const double k = spec.scale, pad = 0.5;
  const double strip = 1.0;  // d = 1 cell height
  if (protos.dim == 1) {
    y0 = 0;
    y1 = strip;
  }
  const double w = (x1 - x0 + 2 * pad) * k, h = (y1 - y0 + 2 * pad) * k;
  // SVG y grows downward; flip so the tiling keeps its orientation.
  auto X = [&](double x) { return detail::num((x - x0 + pad) * k); };
  auto Y = [&](double y) { return detail::num((y1 - y + pad) * k); };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << detail::num(w) << "\" height=\""
     << detail::num(h) << "\" viewBox=\"0 0 " << detail::num(w) << " " << detail::num(h) << "\">\n";
  const std::string stroke = detail::num(spec.stroke * k);
  for (std::size_t i = 0; i < patch.tiles.size(); ++i) {
    const auto& pts = shapes[i];
    const int proto = patch.tiles[i].proto;
    if (protos.dim == 2) {
      os << "<polygon points=\"";
      for (std::size_t j = 0; j < pts.size(); ++j) os << (j ? " " : "") << X(pts[j][0]) << "," << Y(pts[j][1]);
      os << "\" fill=\"" << fill(proto) << "\" stroke=\"black\" stroke-width=\"" << stroke << "\"/>\n";
    } else {
      const double a = std::min(pts[0][0], pts[1][0]), b = std::max(pts[0][0], pts[1][0]);
      os << "<rect x=\"" << X(a) << "\" y=\"" << Y(strip) << "\" width=\"" << detail::num((b - a) * k)
         << "\" height=\"" << detail::num(strip * k) << "\" fill=\"" << fill(proto) << "\" stroke=\"black\" stroke-width=\""
         << stroke << "\"/>\n";
      os << "<text x=\"" << X((a + b) / 2) << "\" y=\"" << Y(strip / 2) << "\" font-size=\"" << detail::num(0.4 * k)
         << "\" text-anchor=\"middle\" dominant-baseline=\"middle\">" << protos[proto].label << "</text>\n";
    }
  }
  for (const auto& hp : spec.highlight) {
    for (const auto& t : hp.tiles) {
      auto s = tile_support(protos, t);
      if (protos.dim == 2) {
        os << "<polyline fill=\"none\" stroke=\"red\" stroke-width=\"" << detail::num(3 * spec.stroke * k)
           << "\" points=\"";
        for (std::size_t j = 0; j <= s.verts.size(); ++j) {
          const auto& v = s.verts[j % s.verts.size()];
          os << (j ? " " : "") << X(v[0].to_double()) << "," << Y(v[1].to_double());
        }
        os << "\"/>\n";
      } else {
        double a = s.verts[0][0].to_double(), b = s.verts[1][0].to_double();
        os << "<line x1=\"" << X(a) << "\" y1=\"" << Y(0) << "\" x2=\"" << X(b) << "\" y2=\"" << Y(0)
           << "\" stroke=\"red\" stroke-width=\"" << detail::num(3 * spec.stroke * k) << "\"/>\n";
      }
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace tilefreq
