#pragma once

#include "graspkit/geometry.hpp"
#include "graspkit/inference.hpp"
#include "graspkit/scene.hpp"

#include <cstdint>
#include <numbers>
#include <random>
#include <string>

namespace graspkit {

/// Seeded generators for fixtures, property checks and the self-test.
class FixtureRng {
 public:
  explicit FixtureRng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  double normal(double mean = 0, double sd = 1) { return std::normal_distribution<double>(mean, sd)(engine_); }
  double angle() { return uniform(-std::numbers::pi / 2, std::numbers::pi / 2); }
  std::mt19937_64& engine() { return engine_; }

  /// Centers in [0, 256)^2, extents in [4, 64], any angle.
  GraspRect rect(double canvas = 256, double min_extent = 4, double max_extent = 64) {
    const double x = uniform(0, canvas), y = uniform(0, canvas);
    return {x, y, angle(), uniform(min_extent, max_extent), uniform(min_extent, max_extent)};
  }

  Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, double sd = 1) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(0, sd);
    return m;
  }

  /// Random scene with grasp centers inside the image.
  Scene scene(const std::string& id, int max_objects = 3, int max_grasps = 4) {
    Scene s{id, integer(32, 480), integer(32, 640), {}};
    const int n = integer(0, max_objects);
    for (int i = 0; i < n; ++i) {
      SceneObject o;
      o.class_id = integer(0, 20);
      o.class_name = "class_" + std::to_string(o.class_id);
      const double x0 = uniform(0, s.width - 1), y0 = uniform(0, s.height - 1);
      o.box = {x0, y0, uniform(x0, s.width), uniform(y0, s.height)};
      if (integer(0, 1)) o.score = uniform(0, 1);
      if (integer(0, 3) == 0) o.instance_mask_ref = "masks/" + id + "_" + std::to_string(i) + ".gkt";
      const int g = integer(0, max_grasps);
      for (int j = 0; j < g; ++j)
        o.grasps.emplace_back(uniform(0, s.width), uniform(0, s.height), angle(), uniform(1, 100),
                              uniform(1, 50), uniform(0, 1), o.class_id);
      // uniform() is half-open, but guard against a rounding up to the edge.
      for (auto& gr : o.grasps) {
        gr.x = std::min(gr.x, s.width - 1e-6);
        gr.y = std::min(gr.y, s.height - 1e-6);
      }
      s.objects.push_back(std::move(o));
    }
    return s;
  }

  /// Detections with random boxes, classes and scores; coefficients empty
  /// unless k > 0.
  std::vector<Detection> detections(int max_count, int n_classes, Eigen::Index k = 0) {
    std::vector<Detection> dets(static_cast<std::size_t>(integer(0, max_count)));
    for (auto& d : dets) {
      d.class_id = integer(0, n_classes - 1);
      // Coarse scores make ties likely, which exercises the tie-break.
      d.score = integer(0, 20) / 20.0;
      const double x0 = uniform(0, 200), y0 = uniform(0, 200);
      d.box = {x0, y0, x0 + uniform(5, 80), y0 + uniform(5, 80)};
      if (k > 0) d.coeffs = CoefficientSet(Eigen::MatrixXd(gaussian(5, k)));
    }
    return dets;
  }

 private:
  std::mt19937_64 engine_;
};

/// Rounds every entry to the nearest float, so values survive float32 storage exactly.
inline Eigen::MatrixXd round_to_float(Eigen::MatrixXd m) {
  // Plain loop: the equivalent cast expression miscompiles its tail under GCC 11 -O3.
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<float>(m.data()[i]);
  return m;
}

}  // namespace graspkit
