#include "graspkit/fixture.hpp"

#include "graspkit/random.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace graspkit {

TargetLogits target_logits(const GraspMaps& maps, const Map2D& instance, double clamp,
                           double angle_scale) {
  auto logit = [clamp](const Map2D& m) {
    const Map2D p = m.cwiseMax(clamp).cwiseMin(1 - clamp);
    return Map2D((p / (1 - p)).log());
  };
  auto atanh = [angle_scale](const Map2D& m) {
    return Map2D((angle_scale * m).unaryExpr([](double v) { return std::atanh(v); }));
  };
  return {logit(instance), logit(maps.quality), atanh(maps.sin2t), atanh(maps.cos2t),
          logit(maps.width)};
}

CoefficientSet fit_coefficients(const PrototypeStack& protos, const TargetLogits& t) {
  const Eigen::Index hw = protos.h * protos.w;
  Eigen::MatrixXd z(hw, kStandardChannels);
  const Map2D* cols[] = {&t.instance, &t.quality, &t.sin2t, &t.cos2t, &t.width};
  for (Eigen::Index j = 0; j < kStandardChannels; ++j) {
    if (cols[j]->rows() != protos.h || cols[j]->cols() != protos.w)
      throw DimensionMismatch("target map size differs from prototype size");
    z.col(j) = Eigen::Map<const Eigen::VectorXd>(cols[j]->data(), hw);
  }
  const Eigen::MatrixXd p = protos.data;
  const Eigen::MatrixXd c = p.colPivHouseholderQr().solve(z);
  return CoefficientSet(Eigen::MatrixXd(c.transpose()));
}

std::vector<FixtureScene> make_fit_fixture(const FixtureOptions& opts, const CodecConfig& cfg) {
  cfg.validate();
  if (opts.max_objects < 1 || opts.n_scenes < 0)
    throw std::invalid_argument("fixture needs at least one object per scene");
  if (5 * opts.max_objects > opts.k)
    throw std::invalid_argument("k must be at least 5 x max_objects for exact representability");

  const int grid = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(opts.max_objects))));
  const double cell = static_cast<double>(std::min(opts.height, opts.width)) / grid;
  constexpr double kJitter = 3.0, kMargin = 2.0;
  const double half_diag =
      opts.max_opening * std::hypot(1.0, cfg.default_height_ratio) / 2 + kJitter + kMargin + 1;
  if (half_diag >= cell / 2)
    throw std::invalid_argument("canvas too small for the requested objects and openings");

  FixtureRng rng(opts.seed);
  const Eigen::Index h = opts.height, w = opts.width, hw = h * w;
  std::vector<FixtureScene> out;
  out.reserve(static_cast<std::size_t>(opts.n_scenes));

  for (int s = 0; s < opts.n_scenes; ++s) {
    FixtureScene fs;
    fs.gt.scene_id = "scene_" + std::to_string(s);
    fs.gt.height = opts.height;
    fs.gt.width = opts.width;

    std::vector<int> cells(static_cast<std::size_t>(grid * grid));
    std::iota(cells.begin(), cells.end(), 0);
    std::shuffle(cells.begin(), cells.end(), rng.engine());
    const int n_obj = rng.integer(1, opts.max_objects);

    Eigen::MatrixXd basis = rng.gaussian(hw, opts.k);
    std::vector<Map2D> instance_masks;
    for (int i = 0; i < n_obj; ++i) {
      const int cell_id = cells[static_cast<std::size_t>(i)];
      const double cx = (cell_id % grid + 0.5) * cell + rng.uniform(-kJitter, kJitter);
      const double cy = (cell_id / grid + 0.5) * cell + rng.uniform(-kJitter, kJitter);
      const double opening = rng.uniform(opts.min_opening, opts.max_opening);
      SceneObject obj;
      obj.class_id = rng.integer(0, opts.n_classes - 1);
      obj.class_name = "class_" + std::to_string(obj.class_id);
      obj.grasps.emplace_back(cx, cy, rng.angle(), opening, opening * cfg.default_height_ratio,
                              1.0, obj.class_id);
      const Box bb = bounding_box(rect_to_polygon(obj.grasps.front()));
      obj.box = Box{std::floor(bb.x_min) - kMargin, std::floor(bb.y_min) - kMargin,
                    std::floor(bb.x_max) + 1 + kMargin, std::floor(bb.y_max) + 1 + kMargin}
                    .clamped(static_cast<double>(w), static_cast<double>(h));

      const GraspMaps maps = encode_grasps(obj.grasps, h, w, cfg);
      const Map2D instance = (maps.quality > 0).cast<double>();
      const TargetLogits t = target_logits(maps, instance);
      const Map2D* cols[] = {&t.instance, &t.quality, &t.sin2t, &t.cos2t, &t.width};
      for (int j = 0; j < 5; ++j)
        basis.col(5 * i + j) = Eigen::Map<const Eigen::VectorXd>(cols[j]->data(), hw);
      fs.gt.objects.push_back(std::move(obj));
      instance_masks.push_back(instance);
    }

    const Eigen::MatrixXd mix =
        Eigen::HouseholderQR<Eigen::MatrixXd>(rng.gaussian(opts.k, opts.k)).householderQ();
    fs.protos = PrototypeStack(h, w, PrototypeStack::Matrix(round_to_float(basis * mix)));

    for (std::size_t i = 0; i < fs.gt.objects.size(); ++i) {
      const auto& obj = fs.gt.objects[i];
      const GraspMaps maps = encode_grasps(obj.grasps, h, w, cfg);
      Detection d;
      d.class_id = obj.class_id;
      d.class_name = obj.class_name;
      d.score = rng.uniform(0.6, 1.0);
      d.box = obj.box;
      d.coeffs = fit_coefficients(fs.protos, target_logits(maps, instance_masks[i]));
      d.coeffs.coeffs = round_to_float(d.coeffs.coeffs);

      if (opts.distractors && rng.integer(0, 1)) {
        Detection dup = d;
        dup.score = d.score - 0.1;
        dup.box = {d.box.x_min + 1, d.box.y_min + 1, d.box.x_max + 1, d.box.y_max + 1};
        dup.coeffs.coeffs = round_to_float(d.coeffs.coeffs + rng.gaussian(5, opts.k, 0.5));
        fs.dets.push_back(std::move(dup));
      }
      fs.dets.push_back(std::move(d));
    }
    if (opts.distractors) {
      Detection junk;
      junk.class_id = rng.integer(0, opts.n_classes - 1);
      junk.class_name = "class_" + std::to_string(junk.class_id);
      junk.score = 0.01;
      junk.box = {0, 0, static_cast<double>(w), static_cast<double>(h)};
      junk.coeffs = CoefficientSet(Eigen::MatrixXd(round_to_float(rng.gaussian(5, opts.k))));
      fs.dets.push_back(std::move(junk));
    }
    out.push_back(std::move(fs));
  }
  return out;
}

}  // namespace graspkit
