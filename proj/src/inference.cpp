#include "graspkit/inference.hpp"

#include "graspkit/parallel.hpp"

#include <algorithm>
#include <numeric>

namespace graspkit {

std::vector<Detection> nms(const std::vector<Detection>& dets, const NmsParams& params) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < dets.size(); ++i)
    if (dets[i].score >= params.score_thr) order.push_back(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

  std::vector<Detection> kept;
  for (std::size_t i : order) {
    const auto& d = dets[i];
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
      return k.class_id == d.class_id && aabb_iou(k.box, d.box) > params.iou_thr;
    });
    if (!suppressed) kept.push_back(d);
  }
  return kept;
}

Prediction infer_scene(const std::string& scene_id, const PrototypeStack& protos,
                       const std::vector<Detection>& dets, const CodecConfig& cfg,
                       const NmsParams& nms_params, const InferOptions& opts) {
  for (const auto& d : dets)
    if (d.coeffs.k() != protos.k())
      throw DimensionMismatch("detection coefficient length " + std::to_string(d.coeffs.k()) +
                              " does not match prototype count " + std::to_string(protos.k()));

  const auto survivors = nms(dets, nms_params);
  Prediction out;
  out.scene.scene_id = scene_id;
  out.scene.height = static_cast<int>(protos.h);
  out.scene.width = static_cast<int>(protos.w);
  out.scene.objects.resize(survivors.size());
  out.instance_masks.resize(survivors.size());

  const auto w = static_cast<double>(protos.w);
  const auto h = static_cast<double>(protos.h);
  parallel_for(survivors.size(), opts.parallelism, [&](std::size_t i) {
    const auto& det = survivors[i];
    const Box box = det.box.clamped(w, h);
    const MaskSet masks = assemble_cropped(protos, det.coeffs, box);

    SceneObject& obj = out.scene.objects[i];
    obj.class_id = det.class_id;
    obj.class_name = det.class_name;
    obj.box = box;
    obj.score = det.score;
    obj.grasps = decode_grasps(masks.quality, masks.sin2t, masks.cos2t, masks.width, box,
                               opts.top_n, cfg);
    for (auto& g : obj.grasps) g.class_id = det.class_id;
    out.instance_masks[i] = (masks.instance > opts.mask_threshold).cast<double>();
  });
  return out;
}

}  // namespace graspkit
