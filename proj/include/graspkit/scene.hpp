#pragma once

#include "graspkit/geometry.hpp"

#include <optional>
#include <string>
#include <vector>

namespace graspkit {

/// One object in an image, with the grasps affiliated to it. Every grasp
/// carries the object's class id.
struct SceneObject {
  int class_id = 0;
  std::string class_name = "object";
  Box box;
  std::vector<GraspRect> grasps;
  /// Detector confidence; absent on ground truth.
  std::optional<double> score;
  std::optional<std::string> instance_mask_ref;

  friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

struct Scene {
  std::string scene_id;
  int height = 0;
  int width = 0;
  std::vector<SceneObject> objects;

  std::size_t grasp_count() const;
  friend bool operator==(const Scene&, const Scene&) = default;
};

/// Throws std::invalid_argument listing every grasp whose center is outside
/// the image or whose class id differs from its object's.
void validate_scene(const Scene& scene);

}  // namespace graspkit
