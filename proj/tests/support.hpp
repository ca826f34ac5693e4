#pragma once

#include "graspkit/scene.hpp"

#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

namespace graspkit::test {

inline constexpr double kDeg = std::numbers::pi / 180.0;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("graspkit_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline SceneObject object(int cls, Box box, std::vector<GraspRect> grasps,
                          std::optional<double> score = std::nullopt) {
  SceneObject o;
  o.class_id = cls;
  o.class_name = "class_" + std::to_string(cls);
  o.box = box;
  for (auto& g : grasps) g.class_id = cls;
  o.grasps = std::move(grasps);
  o.score = score;
  return o;
}

/// Four single-object scenes. Scenes a, b and d carry a valid top-1 grasp;
/// in scene c the prediction is rotated 45 degrees, so image accuracy is 3/4.
inline std::pair<std::vector<Scene>, std::vector<Scene>> micro_fixture() {
  const Box box{80, 80, 120, 120};
  auto gt_scene = [&](const std::string& id, GraspRect g) {
    return Scene{id, 200, 200, {object(1, box, {g})}};
  };
  auto pred_scene = [&](const std::string& id, GraspRect g) {
    return Scene{id, 200, 200, {object(1, box, {g}, 0.9)}};
  };
  const GraspRect g{100, 100, 0.0, 30, 15};
  std::vector<Scene> gt{gt_scene("a", g), gt_scene("b", {100, 100, 0.5, 30, 15}),
                        gt_scene("c", g), gt_scene("d", {100, 100, -1.0, 40, 20})};
  std::vector<Scene> pred{pred_scene("a", g),
                          // 10 degrees and 2 px off: still valid
                          pred_scene("b", {102, 100, 0.5 + 10 * kDeg, 30, 15}),
                          pred_scene("c", {100, 100, 45 * kDeg, 30, 15}),
                          pred_scene("d", {100, 100, -1.0, 40, 20})};
  return {pred, gt};
}

/// One scene whose only predicted grasp overlaps the ground truth with
/// rotated IoU 14/50 = 0.28 (32 x 16 rectangles shifted 18 px along x).
inline std::pair<std::vector<Scene>, std::vector<Scene>> iou_028_fixture() {
  const Box box{70, 80, 140, 120};
  std::vector<Scene> gt{{"s", 200, 200, {object(2, box, {GraspRect{100, 100, 0.0, 32, 16}})}}};
  std::vector<Scene> pred{
      {"s", 200, 200, {object(2, box, {GraspRect{118, 100, 0.0, 32, 16}}, 0.8)}}};
  return {pred, gt};
}

}  // namespace graspkit::test
