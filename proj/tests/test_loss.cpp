#include "graspkit/loss.hpp"
#include "graspkit/random.hpp"
#include "graspkit/selftest.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace graspkit;

namespace {

Map2D one(double v) { return Map2D::Constant(1, 1, v); }

GraspLossTerms terms_with_total(double total) {
  GraspLossTerms t;
  t.total = total;
  return t;
}

MaskSet mask_set(Eigen::Index h, Eigen::Index w, double fill) {
  MaskSet m;
  for (Map2D* c : {&m.instance, &m.quality, &m.sin2t, &m.cos2t, &m.width})
    *c = Map2D::Constant(h, w, fill);
  return m;
}

Map2D permuted(const Map2D& m, const std::vector<Eigen::Index>& perm) {
  Map2D out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.size(); ++i) out.data()[i] = m.data()[perm[static_cast<std::size_t>(i)]];
  return out;
}

}  // namespace

TEST_CASE("smooth_l1") {
  const Map2D a = Map2D::Random(3, 4);
  CHECK(smooth_l1(a, a, Map2D::Ones(3, 4)) == 0);
  CHECK(smooth_l1(one(1), one(0), one(1)) == 0.5);
  CHECK(smooth_l1(one(-2), one(0), one(1)) == 1.5);
  CHECK(smooth_l1(one(5), one(0), one(0)) == 0);
  CHECK_THROWS_AS(smooth_l1(a, Map2D::Zero(4, 3), Map2D::Ones(3, 4)), DimensionMismatch);

  // Mean over valid pixels only.
  Map2D pred(1, 3), valid(1, 3);
  pred << 0.5, 2, 100;
  valid << 1, 1, 0;
  CHECK(smooth_l1(pred, Map2D::Zero(1, 3), valid) == doctest::Approx((0.125 + 1.5) / 2));
}

TEST_CASE("smooth_l1 is once differentiable at |d| = 1") {
  const double h = 1e-7;
  for (double d : {1.0, -1.0}) {
    auto f = [&](double x) { return smooth_l1(one(x), one(0), one(1)); };
    const double left = (f(d) - f(d - h)) / h;
    const double right = (f(d + h) - f(d)) / h;
    CHECK(std::abs(left - right) < 1e-6);
    CHECK(std::abs(f(d + 1e-12) - f(d - 1e-12)) < 1e-11);
  }
}

TEST_CASE("bce") {
  const double eps = kBceEps;
  CHECK(bce(one(1 - eps), one(1), one(1)) <= 2e-7);
  CHECK(bce(one(0.5), one(1), one(1)) == doctest::Approx(std::log(2.0)));
  CHECK(bce(one(0.5), one(0), one(1)) == doctest::Approx(std::log(2.0)));
  // Clamping keeps the loss finite at the extremes.
  CHECK(std::isfinite(bce(one(0), one(1), one(1))));
  CHECK(bce(one(0), one(1), one(1)) == doctest::Approx(-std::log(eps)));
  CHECK(bce(one(0.3), one(1), one(0)) == 0);
}

TEST_CASE("grasp_loss examples") {
  const LossWeights w;
  SUBCASE("prediction equals targets") {
    const std::vector<GraspRect> g{{10, 10, 0.4, 12, 6}};
    const auto gt = encode_grasps(g, 20, 20, {});
    MaskSet pred;
    pred.instance = gt.position;
    pred.quality = gt.position;
    pred.sin2t = gt.sin2t;
    pred.cos2t = gt.cos2t;
    pred.width = gt.width;
    const auto t = grasp_loss(pred, gt, w);
    CHECK(t.sin == 0);
    CHECK(t.cos == 0);
    CHECK(t.w == 0);
    CHECK(t.p <= 2e-7);
  }
  SUBCASE("all-background ground truth") {
    const GraspMaps gt(6, 6);
    const auto t = grasp_loss(mask_set(6, 6, 0.9), gt, w);
    CHECK(t.sin == 0);
    CHECK(t.cos == 0);
    CHECK(t.w == 0);
    CHECK(t.p > 0);
  }
  SUBCASE("hand-computed 2 x 2") {
    GraspMaps gt(2, 2);
    gt.position << 1, 0, 0, 0;
    gt.quality << 0.5, 0.5, 0.5, 2.5;
    gt.sin2t << 0, 0.7, 0.7, 0.7;
    gt.cos2t << 1, 0.7, 0.7, 0.7;
    gt.width << 0.1, 0.9, 0.9, 0.9;
    MaskSet pred = mask_set(2, 2, 0.5);
    pred.sin2t(0, 0) = 0.2;  // d = 0.2   -> 0.02
    pred.cos2t(0, 0) = 0.5;  // d = -0.5  -> 0.125
    pred.width(0, 0) = 0.3;  // d = 0.2   -> 0.02
    // Other pixels of sin/cos/width lie outside the support and are ignored.
    LossWeights ws;
    ws.a_p = 1;
    ws.a_q = 2;
    ws.a_sin = 3;
    ws.a_cos = 4;
    ws.a_w = 5;
    const auto t = grasp_loss(pred, gt, ws);
    CHECK(std::abs(t.p - std::log(2.0)) < 1e-9);  // every pixel at p = 0.5
    CHECK(std::abs(t.q - 1.5 / 4) < 1e-9);         // only d = -2 contributes
    CHECK(std::abs(t.sin - 0.02) < 1e-9);
    CHECK(std::abs(t.cos - 0.125) < 1e-9);
    CHECK(std::abs(t.w - 0.02) < 1e-9);
    CHECK(std::abs(t.total - (std::log(2.0) + 0.75 + 0.06 + 0.5 + 0.1)) < 1e-9);

    LossOptions full;
    full.mask_to_support = false;
    const auto f = grasp_loss(pred, gt, ws, full);
    CHECK(std::abs(f.sin - (0.02 + 3 * 0.5 * 0.2 * 0.2) / 4) < 1e-9);
  }
  SUBCASE("size mismatch") {
    CHECK_THROWS_AS(grasp_loss(mask_set(3, 3, 0.5), GraspMaps(2, 2), w), DimensionMismatch);
  }
}

TEST_CASE("grasp_loss is invariant to a consistent pixel permutation") {
  FixtureRng rng(9);
  const std::vector<GraspRect> g{{8, 9, 0.3, 10, 5}, {12, 6, -1.1, 8, 4}};
  const GraspMaps gt = encode_grasps(g, 16, 18, {});
  MaskSet pred = mask_set(16, 18, 0);
  for (Map2D* c : {&pred.quality, &pred.width}) *c = (Map2D::Random(16, 18) + 1) / 2;
  for (Map2D* c : {&pred.sin2t, &pred.cos2t}) *c = Map2D::Random(16, 18);

  std::vector<Eigen::Index> perm(16 * 18);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng.engine());
  GraspMaps pg(16, 18);
  pg.quality = permuted(gt.quality, perm);
  pg.position = permuted(gt.position, perm);
  pg.sin2t = permuted(gt.sin2t, perm);
  pg.cos2t = permuted(gt.cos2t, perm);
  pg.width = permuted(gt.width, perm);
  MaskSet pp = pred;
  for (auto [dst, src] : {std::pair{&pp.quality, &pred.quality}, {&pp.sin2t, &pred.sin2t},
                          {&pp.cos2t, &pred.cos2t}, {&pp.width, &pred.width}})
    *dst = permuted(*src, perm);

  const LossWeights w;
  CHECK(grasp_loss(pp, pg, w).total == doctest::Approx(grasp_loss(pred, gt, w).total).epsilon(1e-12));
}

TEST_CASE("total_loss") {
  const LossWeights unit;
  CHECK(total_loss({}, {}, unit).total == 0);

  const std::vector<GraspLossTerms> gr{terms_with_total(4)};
  CHECK(total_loss(gr, {1, 2, 3, 5}, unit).total == 15);

  LossWeights w;
  w.a_cls = 2;
  w.a_box = 0;
  w.a_imask = 0;
  w.a_gr = 1;
  w.a_smask = 0;
  CHECK(total_loss(gr, {1, 9, 9, 9}, w).total == 6);

  // Grasp terms are averaged over objects.
  const std::vector<GraspLossTerms> two{terms_with_total(2), terms_with_total(6)};
  const auto r = total_loss(two, {}, unit);
  CHECK(r.l_gr == 4);
  CHECK(r.total == 4);

  LossWeights bad;
  bad.a_box = -1;
  CHECK_THROWS_AS(total_loss(gr, {}, bad), std::invalid_argument);
}

TEST_CASE("doubling a weight doubles its contribution") {
  const std::vector<GraspLossTerms> gr{terms_with_total(0.37)};
  const DetectionLosses det{0.11, 0.29, 0.53, 0.71};
  const LossWeights base;
  const double t0 = total_loss(gr, det, base).total;
  const double terms[] = {0.11, 0.29, 0.53, 0.37, 0.71};
  double LossWeights::*fields[] = {&LossWeights::a_cls, &LossWeights::a_box, &LossWeights::a_imask,
                                   &LossWeights::a_gr, &LossWeights::a_smask};
  for (int i = 0; i < 5; ++i) {
    LossWeights w = base;
    w.*fields[i] *= 2;
    CHECK(std::abs(total_loss(gr, det, w).total - t0 - terms[i]) < 1e-12);
  }
}

TEST_CASE("loss terms are non-negative") {
  FixtureRng rng(10);
  for (int i = 0; i < 20; ++i) {
    const std::vector<GraspRect> g{{rng.uniform(0, 12), rng.uniform(0, 12), rng.angle(),
                                    rng.uniform(3, 10), rng.uniform(2, 6)}};
    const auto gt = encode_grasps(g, 12, 12, {});
    MaskSet pred = mask_set(12, 12, 0);
    pred.quality = (Map2D::Random(12, 12) + 1) / 2;
    pred.sin2t = Map2D::Random(12, 12);
    pred.cos2t = Map2D::Random(12, 12);
    pred.width = (Map2D::Random(12, 12) + 1) / 2;
    const auto t = grasp_loss(pred, gt, {});
    for (double v : {t.p, t.q, t.sin, t.cos, t.w, t.total}) CHECK(v >= 0);
  }
}

TEST_CASE("gradient check") {
  SUBCASE("pure quadratic region") {
    FixtureRng rng(12);
    const Eigen::Index k = 6, h = 9, w = 8;
    PrototypeStack protos(h, w, PrototypeStack::Matrix(
                                    (Eigen::MatrixXd::Random(h * w, k).array() + 1) * 0.05));
    CoefficientSet coeffs(Eigen::MatrixXd(rng.gaussian(kStandardChannels, k, 0.1)));
    for (auto& c : coeffs.channels) c.activation = Activation::Identity;
    GraspMaps gt(h, w);
    gt.quality = Map2D::Random(h, w) * 0.4;
    gt.sin2t = Map2D::Random(h, w) * 0.4;
    gt.cos2t = Map2D::Random(h, w) * 0.4;
    gt.width = Map2D::Random(h, w) * 0.4;
    gt.position = (Map2D::Random(h, w) > 0).cast<double>();
    LossWeights lw;
    lw.a_p = 0;  // smooth-L1 terms only
    const auto r = grad_check(protos, coeffs, gt, lw);
    CHECK(r.max_rel_error < 1e-6);
  }
  SUBCASE("zero prototypes") {
    const auto p = random_grad_problem(3);
    PrototypeStack zero = p.protos;
    zero.data.setZero();
    const auto r = grad_check(zero, p.coeffs, p.gt, {});
    CHECK(r.max_rel_error == 0);
    CHECK(r.analytic.isZero(0));
  }
  SUBCASE("random problems, quality channel") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto p = random_grad_problem(100 + seed);
      GradCheckOptions o;
      o.channel = kQuality;
      CHECK(grad_check(p.protos, p.coeffs, p.gt, {}, o).max_rel_error < 1e-4);
    }
  }
  SUBCASE("random problems, every channel at a small step") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto p = random_grad_problem(200 + seed);
      GradCheckOptions o;
      o.step = 1e-5;
      CHECK(grad_check(p.protos, p.coeffs, p.gt, {}, o).max_rel_error < 1e-4);
    }
  }
  SUBCASE("invalid options") {
    const auto p = random_grad_problem(1);
    GradCheckOptions o;
    o.step = 0;
    CHECK_THROWS_AS(grad_check(p.protos, p.coeffs, p.gt, {}, o), std::invalid_argument);
    o = {};
    o.channel = 9;
    CHECK_THROWS_AS(grad_check(p.protos, p.coeffs, p.gt, {}, o), std::out_of_range);
  }
}
