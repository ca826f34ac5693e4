#pragma once

#include "graspkit/assembly.hpp"
#include "graspkit/maskcodec.hpp"

#include <Eigen/Core>

#include <optional>
#include <span>

namespace graspkit {

/// Outer weights of the composite objective and inner weights of the grasp
/// term. No published values exist; everything defaults to 1.
struct LossWeights {
  double a_cls = 1, a_box = 1, a_imask = 1, a_gr = 1, a_smask = 1;
  double a_p = 1, a_q = 1, a_sin = 1, a_cos = 1, a_w = 1;

  void validate() const;
};

struct LossOptions {
  /// Restrict angle and width losses to the ground-truth position support.
  bool mask_to_support = true;
};

inline constexpr double kBceEps = 1e-7;

/// Mean smooth-L1 over pixels where valid != 0; zero valid pixels gives 0.
double smooth_l1(const Map2D& pred, const Map2D& target, const Map2D& valid);

/// Mean binary cross entropy over valid pixels, pred clamped to [eps, 1-eps].
double bce(const Map2D& pred, const Map2D& target, const Map2D& valid);

struct GraspLossTerms {
  double p = 0, q = 0, sin = 0, cos = 0, w = 0;
  /// a_p p + a_q q + a_sin sin + a_cos cos + a_w w
  double total = 0;
};

GraspLossTerms grasp_loss(const MaskSet& pred, const GraspMaps& gt, const LossWeights& w,
                          const LossOptions& opts = {});

/// Detection-side terms computed elsewhere and passed in as scalars.
struct DetectionLosses {
  double l_cls = 0, l_box = 0, l_imask = 0, l_smask = 0;
};

struct LossReport {
  double l_cls = 0, l_box = 0, l_imask = 0, l_smask = 0;
  // Grasp sub-terms averaged over objects.
  double l_gr_p = 0, l_gr_q = 0, l_gr_sin = 0, l_gr_cos = 0, l_gr_w = 0;
  double l_gr = 0;
  double total = 0;
  LossWeights weights;
};

LossReport total_loss(std::span<const GraspLossTerms> per_object, const DetectionLosses& det,
                      const LossWeights& w);

/// Analytic gradient of grasp_loss(assemble(protos, coeffs)).total with
/// respect to every coefficient; same shape as coeffs.coeffs.
Eigen::MatrixXd grasp_loss_gradient(const PrototypeStack& protos, const CoefficientSet& coeffs,
                                    const GraspMaps& gt, const LossWeights& w,
                                    const LossOptions& opts = {});

struct GradCheckResult {
  double max_rel_error = 0;
  Eigen::MatrixXd analytic;
  Eigen::MatrixXd numeric;
};

struct GradCheckOptions {
  double step = 1e-3;
  /// Restrict the comparison to one coefficient row; all rows when empty.
  std::optional<Eigen::Index> channel;
  LossOptions loss;
};

/// Central finite differences against grasp_loss_gradient; relative error
/// per coefficient is |g_a - g_fd| / max(1e-8, |g_fd|). Rows outside the
/// checked channel are left zero in `numeric`.
GradCheckResult grad_check(const PrototypeStack& protos, const CoefficientSet& coeffs,
                           const GraspMaps& gt, const LossWeights& w,
                           const GradCheckOptions& opts = {});

}  // namespace graspkit
