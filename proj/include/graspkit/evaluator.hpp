#pragma once

#include "graspkit/geometry.hpp"
#include "graspkit/scene.hpp"

#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace graspkit {

/// Validity thresholds of the instance-wise grasp metric: correct class,
/// angle error within 30 degrees and rectangle IoU above 0.25.
struct MetricConfig {
  double iou_thr = 0.25;
  double angle_thr = 30.0 * std::numbers::pi / 180.0;
  bool require_class = true;
  /// Minimum box IoU for a detection to be matched to a ground-truth object.
  double match_iou = 0.5;
  /// Score the best of the top-n grasps instead of only the first.
  int top_n = 1;

  void validate() const;
};

struct Match {
  std::size_t pred;
  std::size_t gt;
  double iou;
};

/// Greedy injective matching by descending box IoU; ties go to the lower
/// pred index, then the lower gt index. Pairs below match_iou stay unmatched.
std::vector<Match> match_detections(const Scene& pred, const Scene& gt, double match_iou);

bool grasp_valid(const GraspRect& pred, std::span<const GraspRect> gt_grasps,
                 const MetricConfig& cfg, bool class_ok);

enum class ObjectOutcome { Valid, Invalid, Missed };

struct SceneResult {
  std::string scene_id;
  bool image_valid = false;
  std::vector<ObjectOutcome> objects;  // one per ground-truth object
};

struct EvalReport {
  std::vector<SceneResult> scenes;  // in ground-truth order
  std::size_t n_scenes = 0;
  std::size_t n_objects = 0;
  std::size_t n_valid_images = 0;
  std::size_t n_valid_objects = 0;
  std::size_t n_invalid_objects = 0;
  std::size_t n_matched = 0;
  std::size_t n_false_positives = 0;
  std::size_t n_missed = 0;
  double image_accuracy = 0;
  double object_accuracy = 0;
};

/// Scenes are aligned by scene_id; throws std::invalid_argument when the
/// two id sets differ.
EvalReport evaluate(std::span<const Scene> pred, std::span<const Scene> gt, const MetricConfig& cfg);

struct SweepCell {
  double iou_thr;
  double angle_thr;  // radians
  EvalReport report;
};

std::vector<double> default_sweep_ious();
std::vector<double> default_sweep_angles();  // radians

/// evaluate() over the IoU x angle grid, IoU-major.
std::vector<SweepCell> threshold_sweep(std::span<const Scene> pred, std::span<const Scene> gt,
                                       const std::vector<double>& ious,
                                       const std::vector<double>& angles,
                                       const MetricConfig& base = {});

/// CSV with header iou_thr,angle_thr,image_acc,object_acc,n_scenes,n_objects;
/// angle_thr is written in degrees.
void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells);

std::string report_to_json(const EvalReport& r, const MetricConfig& cfg);

}  // namespace graspkit
