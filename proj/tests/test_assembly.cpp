#include "graspkit/assembly.hpp"
#include "graspkit/fixture.hpp"
#include "graspkit/inference.hpp"
#include "graspkit/random.hpp"

#include <doctest.h>

using namespace graspkit;

namespace {

PrototypeStack random_protos(FixtureRng& rng, Eigen::Index h, Eigen::Index w, Eigen::Index k,
                             double sd = 1) {
  return {h, w, PrototypeStack::Matrix(rng.gaussian(h * w, k, sd))};
}

CoefficientSet random_coeffs(FixtureRng& rng, Eigen::Index k, double sd = 1) {
  return CoefficientSet(Eigen::MatrixXd(rng.gaussian(kStandardChannels, k, sd)));
}

Detection detection(int cls, double score, Box box, Eigen::Index k = 4) {
  Detection d;
  d.class_id = cls;
  d.score = score;
  d.box = box;
  d.coeffs = CoefficientSet(k);
  return d;
}

bool maps_equal(const MaskSet& a, const MaskSet& b, double tol) {
  auto eq = [&](const Map2D& x, const Map2D& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() && ((x - y).abs() <= tol).all();
  };
  if (a.extras.size() != b.extras.size()) return false;
  for (std::size_t i = 0; i < a.extras.size(); ++i)
    if (a.extras[i].first != b.extras[i].first || !eq(a.extras[i].second, b.extras[i].second))
      return false;
  return eq(a.instance, b.instance) && eq(a.quality, b.quality) && eq(a.sin2t, b.sin2t) &&
         eq(a.cos2t, b.cos2t) && eq(a.width, b.width);
}

}  // namespace

TEST_CASE("assemble examples") {
  SUBCASE("zero coefficients") {
    FixtureRng rng(1);
    const auto m = assemble(random_protos(rng, 6, 7, 3), CoefficientSet(3));
    CHECK((m.instance == 0.5).all());
    CHECK((m.quality == 0.5).all());
    CHECK((m.width == 0.5).all());
    CHECK((m.sin2t == 0).all());
    CHECK((m.cos2t == 0).all());
  }
  SUBCASE("single constant prototype") {
    PrototypeStack p(5, 5, 1);
    p.data.setOnes();
    CoefficientSet c(1);
    c.coeffs(kQuality, 0) = 2.0;
    const auto m = assemble(p, c);
    CHECK(((m.quality - 0.8808).abs() < 1e-4).all());
  }
  SUBCASE("dimension mismatch") {
    FixtureRng rng(2);
    CHECK_THROWS_AS(assemble(random_protos(rng, 4, 4, 3), CoefficientSet(4)), DimensionMismatch);
    CHECK_THROWS_AS(CoefficientSet(Eigen::MatrixXd::Zero(4, 3)), DimensionMismatch);
  }
}

TEST_CASE("pre-activation linearity and output ranges") {
  FixtureRng rng(3);
  for (int t = 0; t < 25; ++t) {
    const auto p = random_protos(rng, 12, 9, 8);
    const auto c1 = random_coeffs(rng, 8, 3), c2 = random_coeffs(rng, 8, 3);
    CoefficientSet sum = c1;
    sum.coeffs += c2.coeffs;
    const Eigen::MatrixXd lhs = assemble_linear(p, sum);
    const Eigen::MatrixXd rhs = assemble_linear(p, c1) + assemble_linear(p, c2);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-9);

    const auto m = assemble(p, c1);
    for (const Map2D* s : {&m.instance, &m.quality, &m.width}) {
      CHECK((*s > 0).all());
      CHECK((*s < 1).all());
    }
    for (const Map2D* s : {&m.sin2t, &m.cos2t}) {
      CHECK((*s > -1).all());
      CHECK((*s < 1).all());
    }
  }
}

TEST_CASE("assemble matches the per-pixel definition") {
  FixtureRng rng(4);
  const auto p = random_protos(rng, 5, 6, 4);
  const auto c = random_coeffs(rng, 4);
  const auto m = assemble(p, c);
  for (Eigen::Index r = 0; r < 5; ++r)
    for (Eigen::Index col = 0; col < 6; ++col) {
      auto pre = [&](Eigen::Index ch) {
        double z = 0;
        for (Eigen::Index j = 0; j < 4; ++j) z += p.prototype(j)(r, col) * c.coeffs(ch, j);
        return z;
      };
      CHECK(m.quality(r, col) == doctest::Approx(activate(Activation::Logistic, pre(kQuality))));
      CHECK(m.sin2t(r, col) == doctest::Approx(std::tanh(pre(kSin))));
      CHECK(m.cos2t(r, col) == doctest::Approx(std::tanh(pre(kCos))));
    }
}

TEST_CASE("scaling prototypes against coefficients leaves masks unchanged") {
  FixtureRng rng(5);
  for (double s : {0.25, 3.0, -7.5}) {
    const auto p = random_protos(rng, 10, 10, 6);
    const auto c = random_coeffs(rng, 6);
    PrototypeStack ps = p;
    ps.data *= s;
    CoefficientSet cs = c;
    cs.coeffs /= s;
    CHECK(maps_equal(assemble(p, c), assemble(ps, cs), 1e-9));
  }
}

TEST_CASE("extra channels") {
  FixtureRng rng(6);
  const auto p = random_protos(rng, 8, 8, 5);
  auto c = random_coeffs(rng, 5);
  c.add_channel({"graspable", Activation::Logistic}, rng.gaussian(1, 5));
  c.add_channel({"raw", Activation::Identity}, rng.gaussian(1, 5));
  CHECK(c.index_of("raw") == 6);
  CHECK_THROWS_AS(c.add_channel({"raw", Activation::Tanh}, rng.gaussian(1, 5)),
                  std::invalid_argument);
  CHECK_THROWS_AS(c.add_channel({"short", Activation::Tanh}, rng.gaussian(1, 3)),
                  DimensionMismatch);
  const auto m = assemble(p, c);
  REQUIRE(m.extras.size() == 2);
  CHECK(m.extras[0].first == "graspable");
  const Eigen::MatrixXd pre = assemble_linear(p, c);
  const Map2D raw = Eigen::Map<const Map2D>(pre.col(6).data(), 8, 8);
  CHECK(((m.extras[1].second - raw).abs() < 1e-15).all());
}

TEST_CASE("crop_mask") {
  const Map2D ones = Map2D::Ones(6, 6);
  CHECK((crop_mask(ones, Box{0, 0, 6, 6}) == ones).all());
  CHECK(crop_mask(ones, Box{3, 3, 3, 3}).sum() == 0);
  CHECK(crop_mask(ones, Box{2, 2, 4, 4}).sum() == 4);
  CHECK(crop_mask(ones, Box{2.5, 2, 4, 4}).sum() == 2);
  const Map2D c = crop_mask(ones, Box{-5, -5, 100, 2});
  CHECK(c.sum() == 12);
  CHECK(c.rows() == 6);
}

TEST_CASE("assemble_cropped equals crop of the full assembly") {
  FixtureRng rng(7);
  for (int t = 0; t < 40; ++t) {
    const auto p = random_protos(rng, 17, 23, 6);
    auto c = random_coeffs(rng, 6);
    if (t % 4 == 0) c.add_channel({"extra", Activation::Tanh}, rng.gaussian(1, 6));
    const double x0 = rng.uniform(-5, 25), y0 = rng.uniform(-5, 20);
    const Box box{x0, y0, x0 + rng.uniform(0, 20), y0 + rng.uniform(0, 15)};
    CHECK(maps_equal(assemble_cropped(p, c, box), crop_masks(assemble(p, c), box), 1e-12));
  }
}

TEST_CASE("nms examples") {
  const NmsParams params;
  SUBCASE("single detection") {
    CHECK(nms({detection(0, 0.6, {0, 0, 4, 4})}, params).size() == 1);
  }
  SUBCASE("identical boxes") {
    const auto kept = nms({detection(0, 0.8, {0, 0, 4, 4}), detection(0, 0.9, {0, 0, 4, 4})}, params);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].score == 0.9);
  }
  SUBCASE("overlap below threshold") {
    CHECK(nms({detection(0, 0.9, {0, 0, 4, 4}), detection(0, 0.8, {2, 0, 6, 4})}, params).size() ==
          2);
  }
  SUBCASE("classes do not suppress each other") {
    CHECK(nms({detection(0, 0.9, {0, 0, 4, 4}), detection(1, 0.8, {0, 0, 4, 4})}, params).size() ==
          2);
  }
  SUBCASE("score threshold and ordering") {
    const auto kept = nms({detection(0, 0.01, {0, 0, 4, 4}), detection(1, 0.5, {10, 10, 14, 14}),
                           detection(2, 0.7, {20, 20, 24, 24}), detection(3, 0.5, {30, 0, 34, 4})},
                          params);
    REQUIRE(kept.size() == 3);
    CHECK(kept[0].class_id == 2);
    CHECK(kept[1].class_id == 1);
    CHECK(kept[2].class_id == 3);
  }
}

TEST_CASE("nms properties on random sets") {
  FixtureRng rng(8);
  const NmsParams params;
  for (int i = 0; i < 100; ++i) {
    const auto dets = rng.detections(25, 3);
    const auto once = nms(dets, params);
    const auto twice = nms(once, params);
    CHECK(once.size() <= dets.size());
    REQUIRE(twice.size() == once.size());
    for (std::size_t j = 0; j < once.size(); ++j) {
      CHECK(twice[j].score == once[j].score);
      CHECK(twice[j].box == once[j].box);
      if (j) CHECK(once[j - 1].score >= once[j].score);
    }
  }
}

TEST_CASE("infer_scene") {
  const CodecConfig cfg;
  SUBCASE("no detections") {
    PrototypeStack p(10, 10, 4);
    const auto pred = infer_scene("empty", p, {}, cfg, {});
    CHECK(pred.scene.objects.empty());
    CHECK(pred.scene.scene_id == "empty");
    CHECK(pred.scene.height == 10);
  }
  SUBCASE("k mismatch") {
    PrototypeStack p(10, 10, 4);
    CHECK_THROWS_AS(infer_scene("s", p, {detection(0, 0.9, {0, 0, 5, 5}, 3)}, cfg, {}),
                    DimensionMismatch);
  }
  SUBCASE("fitted fixture") {
    FixtureOptions opts;
    opts.n_scenes = 4;
    opts.seed = 21;
    for (const auto& f : make_fit_fixture(opts, cfg)) {
      for (int workers : {1, 3}) {
        InferOptions io;
        io.parallelism = workers;
        const auto pred = infer_scene(f.gt.scene_id, f.protos, f.dets, cfg, {}, io);
        REQUIRE(pred.scene.objects.size() == f.gt.objects.size());
        REQUIRE(pred.instance_masks.size() == f.gt.objects.size());
        for (const auto& obj : pred.scene.objects) {
          REQUIRE(obj.grasps.size() == 1);
          const auto& g = obj.grasps[0];
          CHECK(g.class_id == obj.class_id);
          CHECK(obj.box.contains(g.x, g.y));
          // The decoded grasp reproduces a ground-truth grasp of that class.
          bool found = false;
          for (const auto& gt : f.gt.objects)
            for (const auto& t : gt.grasps)
              found = found || (gt.class_id == obj.class_id && rotated_iou(g, t) > 0.5 &&
                                angle_delta(g.theta, t.theta) < 0.1);
          CHECK(found);
        }
        // Boxes are disjoint, so each instance mask is confined to its box.
        for (std::size_t i = 0; i < pred.instance_masks.size(); ++i)
          CHECK(pred.instance_masks[i].sum() ==
                crop_mask(pred.instance_masks[i], pred.scene.objects[i].box).sum());
      }
    }
  }
}
