#include "graspkit/maskcodec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <tuple>

namespace graspkit {

void CodecConfig::validate() const {
  if (!(width_max > 0)) throw std::invalid_argument("width_max must be positive");
  if (!(center_fraction > 0 && center_fraction <= 1))
    throw std::invalid_argument("center_fraction must lie in (0, 1]");
  if (!(q_min >= 0 && q_min < 1)) throw std::invalid_argument("q_min must lie in [0, 1)");
  if (!(default_height_ratio > 0))
    throw std::invalid_argument("default_height_ratio must be positive");
  if (!(plateau_tol >= 0)) throw std::invalid_argument("plateau_tol must be non-negative");
}

GraspMaps::GraspMaps(Eigen::Index h, Eigen::Index w)
    : quality(Map2D::Zero(h, w)),
      position(Map2D::Zero(h, w)),
      sin2t(Map2D::Zero(h, w)),
      cos2t(Map2D::Zero(h, w)),
      width(Map2D::Zero(h, w)) {}

bool GraspMaps::consistent() const {
  const auto same = [&](const Map2D& m) { return m.rows() == rows() && m.cols() == cols(); };
  return same(position) && same(sin2t) && same(cos2t) && same(width);
}

double quality_from_count(int count, QualityTransfer transfer) {
  const double s = 1.0 / (1.0 + std::exp(-static_cast<double>(count)));
  return transfer == QualityTransfer::Shifted ? 2.0 * s - 1.0 : s;
}

int overlap_count(const Point& px, std::span<const GraspRect> grasps) {
  int n = 0;
  for (const auto& g : grasps)
    if (rect_contains(g, px.x(), px.y())) ++n;
  return n;
}

namespace {

struct PixelSpan {
  Eigen::Index r0, r1, c0, c1;  // half-open
};

// Pixels whose centers satisfy the half-open box test, clipped to the map.
PixelSpan pixels_in(const Box& b, Eigen::Index h, Eigen::Index w) {
  auto lo = [](double v, Eigen::Index n) {
    return std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::ceil(v)), 0, n);
  };
  return {lo(b.y_min, h), std::max(lo(b.y_min, h), lo(b.y_max, h)), lo(b.x_min, w),
          std::max(lo(b.x_min, w), lo(b.x_max, w))};
}

// Closed pixel range covering a polygon's bounding box.
PixelSpan pixels_covering(const Polygon& p, Eigen::Index h, Eigen::Index w) {
  const Box bb = bounding_box(p);
  auto clampi = [](double v, Eigen::Index n) {
    return std::clamp<Eigen::Index>(static_cast<Eigen::Index>(v), 0, n);
  };
  return {clampi(std::floor(bb.y_min), h), clampi(std::floor(bb.y_max) + 1, h),
          clampi(std::floor(bb.x_min), w), clampi(std::floor(bb.x_max) + 1, w)};
}

}  // namespace

GraspMaps encode_grasps(std::span<const GraspRect> grasps, Eigen::Index h, Eigen::Index w,
                        const CodecConfig& cfg) {
  cfg.validate();
  if (h <= 0 || w <= 0) throw std::invalid_argument("canvas must be non-empty");
  for (std::size_t i = 0; i < grasps.size(); ++i) {
    const auto& g = grasps[i];
    if (!(g.x >= 0 && g.x < static_cast<double>(w) && g.y >= 0 && g.y < static_cast<double>(h)))
      throw std::invalid_argument("grasp " + std::to_string(i) + " center (" +
                                  std::to_string(g.x) + ", " + std::to_string(g.y) +
                                  ") lies outside the " + std::to_string(h) + "x" +
                                  std::to_string(w) + " canvas");
  }

  GraspMaps maps(h, w);
  Eigen::ArrayXXi counts = Eigen::ArrayXXi::Zero(h, w);

  for (const auto& g : grasps) {
    const auto span = pixels_covering(rect_to_polygon(g), h, w);
    const double s = std::sin(2 * g.theta);
    const double c = std::cos(2 * g.theta);
    const double wn = std::min(g.width / cfg.width_max, 1.0);
    for (Eigen::Index r = span.r0; r < span.r1; ++r) {
      for (Eigen::Index col = span.c0; col < span.c1; ++col) {
        const double px = static_cast<double>(col);
        const double py = static_cast<double>(r);
        if (!rect_contains(g, px, py)) continue;
        ++counts(r, col);
        if (rect_contains(g, px, py, cfg.center_fraction)) {
          maps.position(r, col) = 1.0;
          maps.sin2t(r, col) = s;
          maps.cos2t(r, col) = c;
          maps.width(r, col) = wn;
        }
      }
    }
  }

  const auto transfer = cfg.quality_transfer;
  maps.quality = counts.unaryExpr([transfer](int n) { return quality_from_count(n, transfer); });
  return maps;
}

std::vector<GraspRect> decode_grasps(const GraspMaps& maps, const Box& region, int top_n,
                                     const CodecConfig& cfg) {
  return decode_grasps(maps.quality, maps.sin2t, maps.cos2t, maps.width, region, top_n, cfg);
}

std::vector<GraspRect> decode_grasps(const Map2D& quality, const Map2D& sin2t, const Map2D& cos2t,
                                     const Map2D& width, const Box& region, int top_n,
                                     const CodecConfig& cfg) {
  cfg.validate();
  if (top_n < 1) throw std::invalid_argument("top_n must be at least 1");
  const Eigen::Index h = quality.rows();
  const Eigen::Index w = quality.cols();
  auto same = [&](const Map2D& m) { return m.rows() == h && m.cols() == w; };
  if (!same(sin2t) || !same(cos2t) || !same(width))
    throw std::invalid_argument("grasp maps differ in size");

  const PixelSpan span = pixels_in(region, h, w);
  const Eigen::Index rh = span.r1 - span.r0;
  const Eigen::Index rw = span.c1 - span.c0;
  if (rh <= 0 || rw <= 0) return {};

  const double tol = cfg.plateau_tol;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> visited =
      decltype(visited)::Constant(rh, rw, false);
  auto inside = [&](Eigen::Index r, Eigen::Index c) {
    return r >= span.r0 && r < span.r1 && c >= span.c0 && c < span.c1;
  };

  struct Candidate {
    double quality;
    Eigen::Index r, c;
  };
  std::vector<Candidate> found;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> plateau;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> stack;

  for (Eigen::Index r = span.r0; r < span.r1; ++r) {
    for (Eigen::Index c = span.c0; c < span.c1; ++c) {
      if (visited(r - span.r0, c - span.c0)) continue;
      const double v = quality(r, c);
      if (v < cfg.q_min) continue;

      bool slope = false;
      for (int dr = -1; dr <= 1 && !slope; ++dr)
        for (int dc = -1; dc <= 1; ++dc)
          if ((dr || dc) && inside(r + dr, c + dc) && quality(r + dr, c + dc) > v + tol) {
            slope = true;
            break;
          }
      if (slope) continue;

      // Flood the plateau around (r, c); it is a maximum unless some pixel
      // bordering it is higher.
      plateau.clear();
      stack.assign(1, {r, c});
      visited(r - span.r0, c - span.c0) = true;
      bool maximal = true;
      while (!stack.empty()) {
        const auto [pr, pc] = stack.back();
        stack.pop_back();
        plateau.emplace_back(pr, pc);
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            if (!dr && !dc) continue;
            const Eigen::Index nr = pr + dr;
            const Eigen::Index nc = pc + dc;
            if (!inside(nr, nc)) continue;
            const double nv = quality(nr, nc);
            if (nv > v + tol) {
              maximal = false;
            } else if (nv >= v - tol && !visited(nr - span.r0, nc - span.c0)) {
              visited(nr - span.r0, nc - span.c0) = true;
              stack.emplace_back(nr, nc);
            }
          }
        }
      }
      if (!maximal) continue;

      double mr = 0, mc = 0;
      for (const auto& [pr, pc] : plateau) {
        mr += static_cast<double>(pr);
        mc += static_cast<double>(pc);
      }
      mr /= static_cast<double>(plateau.size());
      mc /= static_cast<double>(plateau.size());
      auto best = plateau.front();
      auto key = [&](const std::pair<Eigen::Index, Eigen::Index>& p) {
        const double dr = static_cast<double>(p.first) - mr;
        const double dc = static_cast<double>(p.second) - mc;
        return std::make_tuple(dr * dr + dc * dc, p.first, p.second);
      };
      for (const auto& p : plateau)
        if (key(p) < key(best)) best = p;
      const double q = quality(best.first, best.second);
      if (q < cfg.q_min) continue;
      found.push_back({q, best.first, best.second});
    }
  }

  std::sort(found.begin(), found.end(), [](const Candidate& a, const Candidate& b) {
    if (a.quality != b.quality) return a.quality > b.quality;
    return std::tie(a.r, a.c) < std::tie(b.r, b.c);
  });
  if (found.size() > static_cast<std::size_t>(top_n)) found.resize(static_cast<std::size_t>(top_n));

  // Degenerate predicted widths are floored so every decoded grasp is valid.
  const double min_width = 1e-6 * cfg.width_max;
  std::vector<GraspRect> out;
  out.reserve(found.size());
  for (const auto& f : found) {
    const double theta = 0.5 * std::atan2(sin2t(f.r, f.c), cos2t(f.r, f.c));
    const double opening = std::max(width(f.r, f.c) * cfg.width_max, min_width);
    out.emplace_back(static_cast<double>(f.c), static_cast<double>(f.r), theta, opening,
                     opening * cfg.default_height_ratio, std::clamp(f.quality, 0.0, 1.0));
  }
  return out;
}

}  // namespace graspkit
