#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace graspkit {

// Image coordinates: x = column, y = row, origin top-left, y grows downward.
// Angles are counter-clockwise in the math convention on (x, -y), so a grasp
// axis at angle t points along (cos t, -sin t) in image coordinates.

/// Wrap any angle into [-pi/2, pi/2). Grasp angles are pi-periodic.
template <typename Scalar>
Scalar normalize_angle(Scalar theta) {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  constexpr Scalar half = pi / 2;
  Scalar t = theta - pi * std::floor((theta + half) / pi);
  if (t >= half) t -= pi;
  if (t < -half) t += pi;
  return t;
}

/// Distance between two grasp angles on the half circle, in [0, pi/2].
template <typename Scalar>
Scalar angle_delta(Scalar t1, Scalar t2) {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  Scalar d = std::fmod(std::abs(t1 - t2), pi);
  return std::min(d, pi - d);
}

/// A planar parallel-jaw grasp. `width` is the gripper opening, measured
/// along the grasp axis; `height` is the jaw extent perpendicular to it.
/// Construction normalizes theta into [-pi/2, pi/2) and validates extents.
template <typename Scalar>
struct GraspRectT {
  Scalar x = 0;
  Scalar y = 0;
  Scalar theta = 0;
  Scalar width = 1;
  Scalar height = 1;
  Scalar quality = 1;
  int class_id = 0;

  GraspRectT() = default;
  GraspRectT(Scalar x_, Scalar y_, Scalar theta_, Scalar width_, Scalar height_,
             Scalar quality_ = 1, int class_id_ = 0)
      : x(x_), y(y_), theta(normalize_angle(theta_)), width(width_), height(height_),
        quality(quality_), class_id(class_id_) {
    if (!(width > 0) || !(height > 0))
      throw std::invalid_argument("grasp extents must be positive");
    if (!(quality >= 0 && quality <= 1))
      throw std::invalid_argument("grasp quality must lie in [0, 1]");
    if (class_id < 0) throw std::invalid_argument("class id must be non-negative");
  }

  Eigen::Matrix<Scalar, 2, 1> center() const { return {x, y}; }
  /// Unit vector along the grasp axis (opening direction).
  Eigen::Matrix<Scalar, 2, 1> axis() const { return {std::cos(theta), -std::sin(theta)}; }
  /// Unit vector along the jaws.
  Eigen::Matrix<Scalar, 2, 1> normal() const { return {std::sin(theta), std::cos(theta)}; }
  Scalar area() const { return width * height; }

  friend bool operator==(const GraspRectT&, const GraspRectT&) = default;
};

/// Half-open pixel box: covers x_min <= x < x_max, y_min <= y < y_max.
template <typename Scalar>
struct BoxT {
  Scalar x_min = 0;
  Scalar y_min = 0;
  Scalar x_max = 0;
  Scalar y_max = 0;

  Scalar width() const { return std::max<Scalar>(x_max - x_min, 0); }
  Scalar height() const { return std::max<Scalar>(y_max - y_min, 0); }
  Scalar area() const { return width() * height(); }
  bool contains(Scalar x, Scalar y) const {
    return x >= x_min && x < x_max && y >= y_min && y < y_max;
  }
  BoxT clamped(Scalar w, Scalar h) const {
    BoxT b{std::clamp<Scalar>(x_min, 0, w), std::clamp<Scalar>(y_min, 0, h),
           std::clamp<Scalar>(x_max, 0, w), std::clamp<Scalar>(y_max, 0, h)};
    b.x_max = std::max(b.x_max, b.x_min);
    b.y_max = std::max(b.y_max, b.y_min);
    return b;
  }

  friend bool operator==(const BoxT&, const BoxT&) = default;
};

template <typename Scalar>
using PointT = Eigen::Matrix<Scalar, 2, 1>;

/// Convex polygon with counter-clockwise vertices (positive signed area in raw
/// x/y coordinates). Zero vertices is the empty polygon.
template <typename Scalar>
using PolygonT = std::vector<PointT<Scalar>>;

template <typename Scalar>
PolygonT<Scalar> rect_to_polygon(const GraspRectT<Scalar>& r) {
  const PointT<Scalar> c = r.center();
  const PointT<Scalar> a = r.axis() * (r.width / 2);
  const PointT<Scalar> n = r.normal() * (r.height / 2);
  return {c - a - n, c + a - n, c + a + n, c - a + n};
}

template <typename Scalar>
Scalar signed_area(const PolygonT<Scalar>& p) {
  const std::size_t n = p.size();
  if (n < 3) return 0;
  Scalar twice = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& u = p[i];
    const auto& v = p[(i + 1) % n];
    twice += u.x() * v.y() - v.x() * u.y();
  }
  return twice / 2;
}

/// Shoelace area.
template <typename Scalar>
Scalar polygon_area(const PolygonT<Scalar>& p) {
  return std::abs(signed_area(p));
}

template <typename Scalar>
BoxT<Scalar> bounding_box(const PolygonT<Scalar>& p) {
  if (p.empty()) return {};
  BoxT<Scalar> b{p[0].x(), p[0].y(), p[0].x(), p[0].y()};
  for (const auto& v : p) {
    b.x_min = std::min(b.x_min, v.x());
    b.y_min = std::min(b.y_min, v.y());
    b.x_max = std::max(b.x_max, v.x());
    b.y_max = std::max(b.y_max, v.y());
  }
  return b;
}

/// Slivers below this area are treated as empty intersections.
template <typename Scalar>
inline constexpr Scalar kDegenerateArea = Scalar(1e-12);

/// Sutherland-Hodgman intersection of two convex polygons.
template <typename Scalar>
PolygonT<Scalar> convex_clip(PolygonT<Scalar> subject, PolygonT<Scalar> clip) {
  if (subject.size() < 3 || clip.size() < 3) return {};
  if (signed_area(subject) < 0) std::reverse(subject.begin(), subject.end());
  if (signed_area(clip) < 0) std::reverse(clip.begin(), clip.end());

  auto side = [](const PointT<Scalar>& a, const PointT<Scalar>& b, const PointT<Scalar>& p) {
    return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
  };

  PolygonT<Scalar> out = std::move(subject);
  PolygonT<Scalar> in;
  for (std::size_t i = 0; i < clip.size() && !out.empty(); ++i) {
    const auto& a = clip[i];
    const auto& b = clip[(i + 1) % clip.size()];
    in.swap(out);
    out.clear();
    for (std::size_t j = 0; j < in.size(); ++j) {
      const auto& p = in[j];
      const auto& q = in[(j + 1) % in.size()];
      const Scalar sp = side(a, b, p);
      const Scalar sq = side(a, b, q);
      if (sp >= 0) out.push_back(p);
      if ((sp >= 0) != (sq >= 0)) {
        const Scalar t = sp / (sp - sq);
        out.push_back(p + t * (q - p));
      }
    }
  }
  if (out.size() < 3 || polygon_area(out) < kDegenerateArea<Scalar>) return {};
  return out;
}

/// Exact IoU of two rotated rectangles. Arguments are put in a canonical
/// order first so the result is bitwise symmetric.
template <typename Scalar>
Scalar rotated_iou(const GraspRectT<Scalar>& a, const GraspRectT<Scalar>& b) {
  auto key = [](const GraspRectT<Scalar>& r) {
    return std::tie(r.x, r.y, r.theta, r.width, r.height);
  };
  const bool swap = key(b) < key(a);
  const auto& first = swap ? b : a;
  const auto& second = swap ? a : b;

  const Scalar inter = polygon_area(convex_clip(rect_to_polygon(first), rect_to_polygon(second)));
  const Scalar uni = first.area() + second.area() - inter;
  if (uni <= 0) return 0;
  return std::clamp<Scalar>(inter / uni, 0, 1);
}

template <typename Scalar>
Scalar aabb_iou(const BoxT<Scalar>& a, const BoxT<Scalar>& b) {
  const Scalar iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const Scalar ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0 || ih <= 0) return 0;
  const Scalar inter = iw * ih;
  const Scalar uni = a.area() + b.area() - inter;
  return uni > 0 ? inter / uni : 0;
}

/// Point-in-rectangle with the boundary counted as inside.
template <typename Scalar>
bool rect_contains(const GraspRectT<Scalar>& r, Scalar px, Scalar py, Scalar along_fraction = 1) {
  constexpr Scalar eps = Scalar(1e-9);
  const PointT<Scalar> d{px - r.x, py - r.y};
  return std::abs(d.dot(r.axis())) <= along_fraction * r.width / 2 + eps &&
         std::abs(d.dot(r.normal())) <= r.height / 2 + eps;
}

using GraspRect = GraspRectT<double>;
using Box = BoxT<double>;
using Point = PointT<double>;
using Polygon = PolygonT<double>;

}  // namespace graspkit
