#include "graspkit/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace graspkit::oracle {

namespace {

struct Extent {
  double x0, y0, x1, y1;
};

Extent extent(const GraspRect& r) {
  const double c = std::abs(std::cos(r.theta)), s = std::abs(std::sin(r.theta));
  const double ex = r.width / 2 * c + r.height / 2 * s;
  const double ey = r.width / 2 * s + r.height / 2 * c;
  return {r.x - ex, r.y - ey, r.x + ex, r.y + ey};
}

}  // namespace

bool covers(const GraspRect& r, double px, double py) {
  const double dx = px - r.x, dy = py - r.y;
  const double c = std::cos(r.theta), s = std::sin(r.theta);
  // Image y points down, so the rectangle frame is rotated by -theta.
  const double u = dx * c - dy * s;
  const double v = dx * s + dy * c;
  return std::abs(u) <= r.width / 2 && std::abs(v) <= r.height / 2;
}

double rasterized_iou(const GraspRect& a, const GraspRect& b, int grid) {
  const Extent ea = extent(a), eb = extent(b);
  const Extent e{std::min(ea.x0, eb.x0), std::min(ea.y0, eb.y0), std::max(ea.x1, eb.x1),
                 std::max(ea.y1, eb.y1)};
  const double sx = (e.x1 - e.x0) / grid, sy = (e.y1 - e.y0) / grid;
  long in_a = 0, in_b = 0, both = 0;
  for (int i = 0; i < grid; ++i) {
    const double py = e.y0 + (i + 0.5) * sy;
    for (int j = 0; j < grid; ++j) {
      const double px = e.x0 + (j + 0.5) * sx;
      const bool ia = covers(a, px, py), ib = covers(b, px, py);
      in_a += ia;
      in_b += ib;
      both += ia && ib;
    }
  }
  const long uni = in_a + in_b - both;
  return uni ? static_cast<double>(both) / static_cast<double>(uni) : 0.0;
}

double rasterized_area(const GraspRect& r, int grid) {
  const Extent e = extent(r);
  const double sx = (e.x1 - e.x0) / grid, sy = (e.y1 - e.y0) / grid;
  long n = 0;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) n += covers(r, e.x0 + (j + 0.5) * sx, e.y0 + (i + 0.5) * sy);
  return static_cast<double>(n) * sx * sy;
}

}  // namespace graspkit::oracle
