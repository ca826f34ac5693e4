#pragma once

#include "graspkit/assembly.hpp"
#include "graspkit/inference.hpp"
#include "graspkit/maskcodec.hpp"
#include "graspkit/scene.hpp"

#include <cstdint>
#include <vector>

namespace graspkit {

/// Pre-activation targets a detection head would need to reproduce an
/// encoded map stack: logit of quality/width/instance, atanh of the angle
/// channels (scaled by `angle_scale` so they stay finite).
struct TargetLogits {
  Map2D instance, quality, sin2t, cos2t, width;
};

TargetLogits target_logits(const GraspMaps& maps, const Map2D& instance, double clamp = 1e-3,
                           double angle_scale = 0.999);

/// Least-squares coefficients c minimizing ||P c - z|| per standard channel.
CoefficientSet fit_coefficients(const PrototypeStack& protos, const TargetLogits& targets);

struct FixtureOptions {
  int n_scenes = 10;
  int height = 96;
  int width = 96;
  Eigen::Index k = 32;
  int max_objects = 3;
  int n_classes = 5;
  double min_opening = 12;
  double max_opening = 30;
  /// Add lower-scored duplicates and sub-threshold detections so NMS and the
  /// score filter have work to do.
  bool distractors = true;
  std::uint64_t seed = 0;
};

struct FixtureScene {
  Scene gt;
  PrototypeStack protos;
  std::vector<Detection> dets;
};

/// Synthetic scenes whose grasp targets are exactly representable: the
/// prototype bank is a random orthogonal mix of the per-object target logits
/// and Gaussian noise maps, and coefficients are recovered by least squares.
/// Objects sit in disjoint grid cells, one grasp each.
std::vector<FixtureScene> make_fit_fixture(const FixtureOptions& opts, const CodecConfig& cfg);

}  // namespace graspkit
