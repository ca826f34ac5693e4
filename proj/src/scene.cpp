#include "graspkit/scene.hpp"

#include <sstream>
#include <stdexcept>

namespace graspkit {

std::size_t Scene::grasp_count() const {
  std::size_t n = 0;
  for (const auto& o : objects) n += o.grasps.size();
  return n;
}

void validate_scene(const Scene& scene) {
  if (scene.height <= 0 || scene.width <= 0)
    throw std::invalid_argument("scene " + scene.scene_id + ": image size must be positive");
  std::ostringstream bad;
  int n_bad = 0;
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const auto& obj = scene.objects[i];
    for (std::size_t j = 0; j < obj.grasps.size(); ++j) {
      const auto& g = obj.grasps[j];
      const bool inside = g.x >= 0 && g.x < scene.width && g.y >= 0 && g.y < scene.height;
      if (!inside || g.class_id != obj.class_id) {
        bad << (n_bad++ ? "; " : "") << "object " << i << " grasp " << j << " at (" << g.x << ", "
            << g.y << ")" << (inside ? " has class " + std::to_string(g.class_id) : " out of bounds");
      }
    }
  }
  if (n_bad)
    throw std::invalid_argument("scene " + scene.scene_id + ": " + std::to_string(n_bad) +
                                " invalid grasp(s): " + bad.str());
}

}  // namespace graspkit
