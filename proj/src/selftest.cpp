#include "graspkit/selftest.hpp"

#include "graspkit/datasets.hpp"
#include "graspkit/inference.hpp"
#include "graspkit/oracle.hpp"
#include "graspkit/random.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <sstream>

namespace graspkit {

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

bool same_detection(const Detection& a, const Detection& b) {
  return a.class_id == b.class_id && a.score == b.score && a.box == b.box;
}

}  // namespace

SuiteResult check_iou_oracle(std::uint64_t seed, int pairs, double bias) {
  SuiteResult r{"rotated-iou-oracle"};
  Stopwatch sw;
  FixtureRng rng(seed);
  for (int i = 0; i < pairs; ++i) {
    const GraspRect a = rng.rect(), b = rng.rect();
    const double exact = rotated_iou(a, b) + bias;
    const double err = std::abs(exact - oracle::rasterized_iou(a, b, 512));
    const bool symmetric = std::abs(rotated_iou(a, b) - rotated_iou(b, a)) <= 1e-12;
    r.worst = std::max(r.worst, err);
    r.passed += err <= 0.02 && symmetric;
    ++r.total;
  }
  r.seconds = sw.seconds();
  return r;
}

SuiteResult check_codec_round_trip(std::uint64_t seed, int scenes) {
  SuiteResult r{"codec-round-trip"};
  Stopwatch sw;
  FixtureRng rng(seed);
  const CodecConfig cfg;
  constexpr Eigen::Index kSize = 320;
  const Box full{0, 0, static_cast<double>(kSize), static_cast<double>(kSize)};
  for (int i = 0; i < scenes; ++i) {
    const double opening = rng.uniform(10, cfg.width_max);
    const GraspRect g(rng.uniform(120, 200), rng.uniform(120, 200), rng.angle(), opening,
                      opening * cfg.default_height_ratio);
    const GraspRect one[] = {g};
    const auto decoded = decode_grasps(encode_grasps(one, kSize, kSize, cfg), full, 1, cfg);
    ++r.total;
    if (decoded.empty()) {
      r.worst = std::numeric_limits<double>::infinity();
      continue;
    }
    const auto& d = decoded.front();
    const double center_err = std::hypot(d.x - g.x, d.y - g.y);
    const double angle_err = angle_delta(d.theta, g.theta) * 180 / std::numbers::pi;
    const double width_err = std::abs(d.width - g.width) / g.width;
    r.worst = std::max({r.worst, center_err, angle_err, width_err});
    r.passed += center_err <= 1.0 && angle_err <= 1.0 && width_err <= 0.02;
  }
  r.seconds = sw.seconds();
  return r;
}

GradProblem random_grad_problem(std::uint64_t seed, Eigen::Index k, Eigen::Index size) {
  FixtureRng rng(seed);
  GradProblem p;
  PrototypeStack::Matrix data(size * size, k);
  for (Eigen::Index i = 0; i < data.size(); ++i) data.data()[i] = rng.uniform(0, 1);
  p.protos = PrototypeStack(size, size, std::move(data));
  p.coeffs = CoefficientSet(Eigen::MatrixXd(rng.gaussian(5, k, 0.25)));
  CodecConfig cfg;
  cfg.width_max = static_cast<double>(size);
  std::vector<GraspRect> grasps;
  const int n = rng.integer(1, 3);
  for (int i = 0; i < n; ++i) {
    const double opening = rng.uniform(4, 0.8 * static_cast<double>(size));
    grasps.emplace_back(rng.uniform(4, size - 4.0), rng.uniform(4, size - 4.0), rng.angle(),
                        opening, opening * cfg.default_height_ratio);
  }
  p.gt = encode_grasps(grasps, size, size, cfg);
  return p;
}

SuiteResult check_gradients(std::uint64_t seed, int trials, Eigen::Index k, double step,
                            double tol, const LossWeights& w) {
  SuiteResult r{"gradient-check"};
  Stopwatch sw;
  for (int t = 0; t < trials; ++t) {
    const GradProblem p = random_grad_problem(seed * 1000003ULL + static_cast<std::uint64_t>(t), k);
    GradCheckOptions opts;
    opts.step = step;
    opts.channel = kQuality;
    const double err = grad_check(p.protos, p.coeffs, p.gt, w, opts).max_rel_error;
    r.worst = std::max(r.worst, err);
    r.passed += err < tol;
    ++r.total;
  }
  r.seconds = sw.seconds();
  return r;
}

SuiteResult check_nms_properties(std::uint64_t seed, int sets) {
  SuiteResult r{"nms-properties"};
  Stopwatch sw;
  FixtureRng rng(seed);
  const NmsParams params;
  for (int i = 0; i < sets; ++i) {
    const auto dets = rng.detections(30, 3);
    const auto once = nms(dets, params);
    const auto twice = nms(once, params);
    bool ok = once.size() <= dets.size() && twice.size() == once.size();
    for (std::size_t j = 0; ok && j < once.size(); ++j) ok = same_detection(once[j], twice[j]);

    // The first highest-scoring eligible detection of each class survives.
    for (int cls = 0; ok && cls < 3; ++cls) {
      const Detection* top = nullptr;
      for (const auto& d : dets)
        if (d.class_id == cls && d.score >= params.score_thr && (!top || d.score > top->score))
          top = &d;
      if (!top) continue;
      ok = std::any_of(once.begin(), once.end(),
                       [&](const Detection& d) { return same_detection(d, *top); });
    }
    r.passed += ok;
    ++r.total;
  }
  r.seconds = sw.seconds();
  return r;
}

SuiteResult check_file_round_trips(std::uint64_t seed, int instances) {
  SuiteResult r{"file-round-trips"};
  Stopwatch sw;
  FixtureRng rng(seed);
  const float specials[] = {0.0f, -0.0f, std::numeric_limits<float>::infinity(),
                            std::numeric_limits<float>::denorm_min(),
                            std::numeric_limits<float>::max()};
  for (int i = 0; i < instances; ++i) {
    Tensor t;
    const int rank = rng.integer(2, 3);
    for (int d = 0; d < rank; ++d) t.dims.push_back(static_cast<std::uint32_t>(rng.integer(1, 9)));
    t.data.resize(t.numel());
    for (auto& v : t.data)
      v = rng.integer(0, 9) == 0 ? specials[rng.integer(0, 4)]
                                 : static_cast<float>(rng.normal(0, 100));
    const auto bytes = write_tensor(t);
    const Tensor back = read_tensor(bytes);
    const bool tensor_ok = back.dims == t.dims &&
                           std::memcmp(back.data.data(), t.data.data(), 4 * t.data.size()) == 0 &&
                           write_tensor(back) == bytes;

    std::vector<Scene> scenes;
    for (int s = 0; s < 3; ++s) scenes.push_back(rng.scene("s" + std::to_string(i) + "_" + std::to_string(s)));
    std::stringstream io;
    write_scenes(io, scenes);
    const bool scenes_ok = read_scenes(io) == scenes;

    r.passed += tensor_ok && scenes_ok;
    ++r.total;
  }
  r.seconds = sw.seconds();
  return r;
}

std::vector<SuiteResult> run_selftest(const SelftestOptions& opts) {
  return {check_iou_oracle(opts.seed, 1000, opts.iou_bias), check_codec_round_trip(opts.seed),
          check_gradients(opts.seed), check_nms_properties(opts.seed),
          check_file_round_trips(opts.seed)};
}

}  // namespace graspkit
