#pragma once

#include "graspkit/loss.hpp"
#include "graspkit/maskcodec.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace graspkit {

struct SelftestOptions {
  std::uint64_t seed = 0;
  /// Test hook: added to every rotated IoU before it is compared with the
  /// oracle. A non-zero value must make the oracle suite fail.
  double iou_bias = 0;
};

struct SuiteResult {
  std::string name;
  int passed = 0;
  int total = 0;
  double seconds = 0;
  /// Worst observed deviation, in the suite's own units.
  double worst = 0;

  bool ok() const { return total > 0 && passed == total; }
};

// Individual oracle suites; the self-test runs all of them.
SuiteResult check_iou_oracle(std::uint64_t seed, int pairs = 1000, double bias = 0);
SuiteResult check_codec_round_trip(std::uint64_t seed, int scenes = 200);
/// Gradient of the full grasp loss with respect to the k quality-channel
/// coefficients, checked against central differences.
SuiteResult check_gradients(std::uint64_t seed, int trials = 20, Eigen::Index k = 16,
                            double step = 1e-3, double tol = 1e-4,
                            const LossWeights& weights = {});
SuiteResult check_nms_properties(std::uint64_t seed, int sets = 500);
SuiteResult check_file_round_trips(std::uint64_t seed, int instances = 50);

/// Random prototypes, coefficients and ground truth for a gradient check.
/// Prototypes are uniform in [0, 1), like rectified ProtoNet outputs.
struct GradProblem {
  PrototypeStack protos;
  CoefficientSet coeffs;
  GraspMaps gt;
};
GradProblem random_grad_problem(std::uint64_t seed, Eigen::Index k = 16, Eigen::Index size = 24);

std::vector<SuiteResult> run_selftest(const SelftestOptions& opts);

}  // namespace graspkit
