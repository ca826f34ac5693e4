#include "graspkit/evaluator.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <stdexcept>

namespace graspkit {

void MetricConfig::validate() const {
  if (!(iou_thr >= 0 && iou_thr < 1)) throw std::invalid_argument("iou_thr must lie in [0, 1)");
  if (!(angle_thr >= 0 && angle_thr <= std::numbers::pi / 2))
    throw std::invalid_argument("angle_thr must lie in [0, pi/2]");
  if (!(match_iou >= 0 && match_iou <= 1))
    throw std::invalid_argument("match_iou must lie in [0, 1]");
  if (top_n < 1) throw std::invalid_argument("top_n must be at least 1");
}

std::vector<Match> match_detections(const Scene& pred, const Scene& gt, double match_iou) {
  std::vector<Match> pairs;
  for (std::size_t p = 0; p < pred.objects.size(); ++p)
    for (std::size_t g = 0; g < gt.objects.size(); ++g) {
      const double iou = aabb_iou(pred.objects[p].box, gt.objects[g].box);
      if (iou >= match_iou && iou > 0) pairs.push_back({p, g, iou});
    }
  std::sort(pairs.begin(), pairs.end(), [](const Match& a, const Match& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.pred != b.pred) return a.pred < b.pred;
    return a.gt < b.gt;
  });
  std::vector<bool> pred_used(pred.objects.size()), gt_used(gt.objects.size());
  std::vector<Match> out;
  for (const auto& m : pairs) {
    if (pred_used[m.pred] || gt_used[m.gt]) continue;
    pred_used[m.pred] = gt_used[m.gt] = true;
    out.push_back(m);
  }
  return out;
}

bool grasp_valid(const GraspRect& pred, std::span<const GraspRect> gt_grasps,
                 const MetricConfig& cfg, bool class_ok) {
  if (cfg.require_class && !class_ok) return false;
  return std::any_of(gt_grasps.begin(), gt_grasps.end(), [&](const GraspRect& g) {
    return angle_delta(pred.theta, g.theta) <= cfg.angle_thr && rotated_iou(pred, g) > cfg.iou_thr;
  });
}

namespace {

bool object_grasps_valid(const SceneObject& pred, const SceneObject& gt, const MetricConfig& cfg) {
  const std::size_t n = std::min<std::size_t>(pred.grasps.size(), static_cast<std::size_t>(cfg.top_n));
  for (std::size_t i = 0; i < n; ++i)
    if (grasp_valid(pred.grasps[i], gt.grasps, cfg, pred.class_id == gt.class_id)) return true;
  return false;
}

}  // namespace

EvalReport evaluate(std::span<const Scene> pred, std::span<const Scene> gt, const MetricConfig& cfg) {
  cfg.validate();
  std::map<std::string, const Scene*> by_id;
  for (const auto& s : pred)
    if (!by_id.emplace(s.scene_id, &s).second)
      throw std::invalid_argument("duplicate prediction scene id " + s.scene_id);
  if (pred.size() != gt.size())
    throw std::invalid_argument("prediction and ground-truth scene counts differ (" +
                                std::to_string(pred.size()) + " vs " + std::to_string(gt.size()) +
                                ")");

  EvalReport r;
  for (const auto& g : gt) {
    const auto it = by_id.find(g.scene_id);
    if (it == by_id.end())
      throw std::invalid_argument("no prediction for ground-truth scene " + g.scene_id);
    const Scene& p = *it->second;

    SceneResult sr;
    sr.scene_id = g.scene_id;
    sr.objects.assign(g.objects.size(), ObjectOutcome::Missed);
    const auto matches = match_detections(p, g, cfg.match_iou);
    for (const auto& m : matches) {
      const bool ok = object_grasps_valid(p.objects[m.pred], g.objects[m.gt], cfg);
      sr.objects[m.gt] = ok ? ObjectOutcome::Valid : ObjectOutcome::Invalid;
    }
    r.n_matched += matches.size();
    r.n_false_positives += p.objects.size() - matches.size();

    if (!p.objects.empty()) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < p.objects.size(); ++i)
        if (p.objects[i].score.value_or(0) > p.objects[best].score.value_or(0)) best = i;
      sr.image_valid = std::any_of(g.objects.begin(), g.objects.end(), [&](const SceneObject& o) {
        return object_grasps_valid(p.objects[best], o, cfg);
      });
    }

    r.n_valid_images += sr.image_valid;
    for (auto o : sr.objects) {
      ++r.n_objects;
      r.n_valid_objects += o == ObjectOutcome::Valid;
      r.n_invalid_objects += o == ObjectOutcome::Invalid;
      r.n_missed += o == ObjectOutcome::Missed;
    }
    r.scenes.push_back(std::move(sr));
  }
  r.n_scenes = gt.size();
  r.image_accuracy = r.n_scenes ? static_cast<double>(r.n_valid_images) / r.n_scenes : 0.0;
  r.object_accuracy = r.n_objects ? static_cast<double>(r.n_valid_objects) / r.n_objects : 0.0;
  return r;
}

std::vector<double> default_sweep_ious() { return {0.25, 0.30, 0.35}; }

std::vector<double> default_sweep_angles() {
  std::vector<double> a;
  for (int deg = 5; deg <= 30; deg += 5) a.push_back(deg * std::numbers::pi / 180.0);
  return a;
}

std::vector<SweepCell> threshold_sweep(std::span<const Scene> pred, std::span<const Scene> gt,
                                       const std::vector<double>& ious,
                                       const std::vector<double>& angles, const MetricConfig& base) {
  if (ious.empty() || angles.empty()) throw std::invalid_argument("threshold lists must be non-empty");
  std::vector<SweepCell> cells;
  for (double iou : ious) {
    for (double angle : angles) {
      MetricConfig cfg = base;
      cfg.iou_thr = iou;
      cfg.angle_thr = angle;
      cells.push_back({iou, angle, evaluate(pred, gt, cfg)});
    }
  }
  return cells;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells) {
  out << "iou_thr,angle_thr,image_acc,object_acc,n_scenes,n_objects\n";
  for (const auto& c : cells) {
    const double deg = c.angle_thr * 180.0 / std::numbers::pi;
    out << std::setprecision(6) << c.iou_thr << ',' << std::round(deg * 1e6) / 1e6 << ','
        << std::setprecision(10) << c.report.image_accuracy << ',' << c.report.object_accuracy
        << ',' << c.report.n_scenes << ',' << c.report.n_objects << '\n';
  }
}

std::string report_to_json(const EvalReport& r, const MetricConfig& cfg) {
  nlohmann::json scenes = nlohmann::json::array();
  for (const auto& s : r.scenes) {
    nlohmann::json objs = nlohmann::json::array();
    for (auto o : s.objects)
      objs.push_back(o == ObjectOutcome::Valid ? "valid" : o == ObjectOutcome::Invalid ? "invalid" : "missed");
    scenes.push_back({{"scene_id", s.scene_id}, {"image_valid", s.image_valid}, {"objects", objs}});
  }
  nlohmann::json j = {
      {"config",
       {{"iou_thr", cfg.iou_thr},
        {"angle_thr_deg", std::round(cfg.angle_thr * 180.0 / std::numbers::pi * 1e9) / 1e9},
        {"require_class", cfg.require_class},
        {"match_iou", cfg.match_iou},
        {"top_n", cfg.top_n}}},
      {"image_accuracy", r.image_accuracy},
      {"object_accuracy", r.object_accuracy},
      {"counts",
       {{"scenes", r.n_scenes},
        {"objects", r.n_objects},
        {"valid_images", r.n_valid_images},
        {"valid_objects", r.n_valid_objects},
        {"invalid_objects", r.n_invalid_objects},
        {"matched", r.n_matched},
        {"false_positives", r.n_false_positives},
        {"missed", r.n_missed}}},
      {"scenes", scenes}};
  return j.dump(2);
}

}  // namespace graspkit
