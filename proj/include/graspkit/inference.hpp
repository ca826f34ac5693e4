#pragma once

#include "graspkit/assembly.hpp"
#include "graspkit/maskcodec.hpp"
#include "graspkit/scene.hpp"

#include <optional>
#include <string>
#include <vector>

namespace graspkit {

/// One detector output surviving the backbone: class, confidence, box and
/// the coefficient sets used to assemble its masks.
struct Detection {
  int class_id = 0;
  std::string class_name = "object";
  double score = 0;
  Box box;
  CoefficientSet coeffs;
  std::optional<MaskSet> masks;
};

struct NmsParams {
  double iou_thr = 0.5;
  double score_thr = 0.05;
};

/// Class-aware greedy NMS. Output is ordered by score descending; equal
/// scores keep input order.
std::vector<Detection> nms(const std::vector<Detection>& dets, const NmsParams& params);

struct InferOptions {
  int top_n = 1;
  int parallelism = 1;
  double mask_threshold = 0.5;
};

struct Prediction {
  Scene scene;
  /// Binary instance masks, one per scene object.
  std::vector<Map2D> instance_masks;
};

/// nms -> assemble -> crop by box -> decode inside the box. Each decoded
/// grasp inherits its detection's class id.
Prediction infer_scene(const std::string& scene_id, const PrototypeStack& protos,
                       const std::vector<Detection>& dets, const CodecConfig& cfg,
                       const NmsParams& nms_params, const InferOptions& opts = {});

}  // namespace graspkit
