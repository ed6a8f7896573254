#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "lscae/datasets.hpp"
#include "lscae/error.hpp"

namespace lscae {

namespace {

struct Point {
  double x;
  double y;
};
using Stroke = std::vector<Point>;
using Glyph = std::vector<Stroke>;

Stroke ellipse(double cx, double cy, double rx, double ry, int segments = 20) {
  Stroke s;
  for (int i = 0; i <= segments; ++i) {
    const double t = 2.0 * std::numbers::pi * i / segments;
    s.push_back({cx + rx * std::cos(t), cy + ry * std::sin(t)});
  }
  return s;
}

// Glyphs in the unit square, y pointing down.
const std::array<Glyph, 10>& glyphs() {
  static const std::array<Glyph, 10> g = {
      Glyph{ellipse(0.5, 0.5, 0.27, 0.38)},
      Glyph{{{0.35, 0.25}, {0.52, 0.1}, {0.52, 0.9}}},
      Glyph{{{0.25, 0.3}, {0.35, 0.15}, {0.55, 0.1}, {0.72, 0.2}, {0.72, 0.38}, {0.25, 0.88},
             {0.78, 0.88}}},
      Glyph{{{0.25, 0.12}, {0.65, 0.12}, {0.75, 0.3}, {0.48, 0.48}, {0.75, 0.64}, {0.68, 0.87},
             {0.25, 0.88}}},
      Glyph{{{0.65, 0.9}, {0.65, 0.1}, {0.2, 0.65}, {0.82, 0.65}}},
      Glyph{{{0.75, 0.1}, {0.32, 0.1}, {0.28, 0.45}, {0.6, 0.42}, {0.76, 0.6}, {0.66, 0.85},
             {0.25, 0.88}}},
      Glyph{{{0.7, 0.12}, {0.42, 0.28}, {0.28, 0.58}, {0.35, 0.85}, {0.62, 0.88}, {0.73, 0.68},
             {0.55, 0.52}, {0.3, 0.6}}},
      Glyph{{{0.22, 0.12}, {0.78, 0.12}, {0.42, 0.9}}},
      Glyph{ellipse(0.5, 0.29, 0.19, 0.18), ellipse(0.5, 0.7, 0.24, 0.2)},
      Glyph{ellipse(0.48, 0.32, 0.22, 0.2), {{0.7, 0.34}, {0.64, 0.9}}},
  };
  return g;
}

double segment_distance(Point p, Point a, Point b) {
  const double vx = b.x - a.x;
  const double vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
  t = std::fmax(0.0, std::fmin(1.0, t));
  const double dx = p.x - (a.x + t * vx);
  const double dy = p.y - (a.y + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

Dataset gen_digits(const DigitsConfig& cfg, RngStream& stream) {
  if (cfg.n == 0) fail(ErrorKind::ConfigInvalid, "digits needs n >= 1");
  constexpr int kFine = 32;
  constexpr int kCoarse = 8;
  constexpr int kBlock = kFine / kCoarse;

  Dataset out{Matrix(cfg.n, kCoarse * kCoarse), std::vector<int>(cfg.n), {}};
  for (int r = 0; r < kCoarse; ++r)
    for (int c = 0; c < kCoarse; ++c)
      out.feature_names.push_back("px" + std::to_string(r) + "_" + std::to_string(c));

  for (std::size_t s = 0; s < cfg.n; ++s) {
    const int label = static_cast<int>(s % 10);
    (*out.labels)[s] = label;

    // Random affine about the glyph center.
    const double angle = stream.uniform(-0.2, 0.2);
    const double scale_x = stream.uniform(0.8, 1.1);
    const double scale_y = stream.uniform(0.85, 1.1);
    const double shear = stream.uniform(-0.2, 0.2);
    const double tx = stream.uniform(-0.07, 0.07);
    const double ty = stream.uniform(-0.07, 0.07);
    const double half_width = 0.5 * stream.uniform(0.09, 0.16);
    const double ca = std::cos(angle);
    const double sa = std::sin(angle);
    auto transform = [&](Point p) {
      const double x = (p.x - 0.5 + shear * (p.y - 0.5)) * scale_x;
      const double y = (p.y - 0.5) * scale_y;
      return Point{0.5 + tx + ca * x - sa * y, 0.5 + ty + sa * x + ca * y};
    };

    std::vector<Stroke> strokes;
    for (const Stroke& stroke : glyphs()[label]) {
      Stroke t;
      for (Point p : stroke) t.push_back(transform(p));
      strokes.push_back(std::move(t));
    }

    std::array<int, kCoarse * kCoarse> counts{};
    for (int r = 0; r < kFine; ++r) {
      for (int c = 0; c < kFine; ++c) {
        const Point p{(c + 0.5) / kFine, (r + 0.5) / kFine};
        bool on = false;
        for (const Stroke& stroke : strokes) {
          for (std::size_t k = 0; k + 1 < stroke.size() && !on; ++k)
            on = segment_distance(p, stroke[k], stroke[k + 1]) <= half_width;
          if (on) break;
        }
        if (on) ++counts[(r / kBlock) * kCoarse + c / kBlock];
      }
    }
    for (int j = 0; j < kCoarse * kCoarse; ++j)
      out.x(s, j) = std::round(counts[j] * 255.0 / (kBlock * kBlock));
  }
  return out;
}

}  // namespace lscae
