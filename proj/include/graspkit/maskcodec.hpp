#pragma once

#include "graspkit/geometry.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace graspkit {

/// Row-major h x w map; element (r, c) is the pixel centered at (x = c, y = r).
template <typename Scalar>
using MapT = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Map2D = MapT<double>;

enum class QualityTransfer {
  Shifted,     ///< 2 * sigmoid(count) - 1, zero on background
  RawSigmoid,  ///< sigmoid(count), 0.5 on background
};

struct CodecConfig {
  double width_max = 150.0;
  /// Fraction of the opening extent (centered) that carries angle/width values.
  double center_fraction = 1.0 / 3.0;
  double q_min = 0.1;
  double default_height_ratio = 0.5;
  QualityTransfer quality_transfer = QualityTransfer::Shifted;
  /// Neighboring pixels within this quality difference form one plateau.
  double plateau_tol = 1e-6;

  void validate() const;
};

/// Per-object target stack: quality, binary position, sin 2t, cos 2t and
/// opening width normalized by width_max.
struct GraspMaps {
  Map2D quality;
  Map2D position;
  Map2D sin2t;
  Map2D cos2t;
  Map2D width;

  GraspMaps() = default;
  GraspMaps(Eigen::Index h, Eigen::Index w);

  Eigen::Index rows() const { return quality.rows(); }
  Eigen::Index cols() const { return quality.cols(); }
  bool consistent() const;
};

double quality_from_count(int count, QualityTransfer transfer = QualityTransfer::Shifted);

int overlap_count(const Point& px, std::span<const GraspRect> grasps);

/// Rasterize grasp annotations into a target map stack. Throws
/// std::invalid_argument when a grasp center lies outside the canvas.
GraspMaps encode_grasps(std::span<const GraspRect> grasps, Eigen::Index h, Eigen::Index w,
                        const CodecConfig& cfg);

/// Grasp inference from a (possibly cropped) map stack. Candidates are local
/// maxima of the quality map inside `region`; a flat plateau is one maximum,
/// represented by its pixel nearest the plateau centroid. Results are sorted
/// by quality descending, then row-major.
std::vector<GraspRect> decode_grasps(const GraspMaps& maps, const Box& region, int top_n,
                                     const CodecConfig& cfg);

/// Same as above but reading angle and width from separate maps, for
/// predictions that carry no position channel.
std::vector<GraspRect> decode_grasps(const Map2D& quality, const Map2D& sin2t, const Map2D& cos2t,
                                     const Map2D& width, const Box& region, int top_n,
                                     const CodecConfig& cfg);

}  // namespace graspkit
