#include "graspkit/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace graspkit {

void LossWeights::validate() const {
  for (double v : {a_cls, a_box, a_imask, a_gr, a_smask, a_p, a_q, a_sin, a_cos, a_w})
    if (!std::isfinite(v) || v < 0)
      throw std::invalid_argument("loss weights must be finite and non-negative");
}

namespace {

void require_same(const Map2D& a, const Map2D& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch(std::string(what) + ": map sizes differ");
}

double huber(double d) {
  const double a = std::abs(d);
  return a < 1 ? 0.5 * d * d : a - 0.5;
}

double huber_slope(double d) {
  if (std::abs(d) < 1) return d;
  return d > 0 ? 1.0 : -1.0;
}

double activation_slope(Activation act, double y) {
  switch (act) {
    case Activation::Logistic:
      return y * (1 - y);
    case Activation::Tanh:
      return 1 - y * y;
    case Activation::Identity:
      break;
  }
  return 1;
}

Map2D support(const GraspMaps& gt, const LossOptions& opts) {
  return opts.mask_to_support ? gt.position : Map2D::Ones(gt.rows(), gt.cols());
}

}  // namespace

double smooth_l1(const Map2D& pred, const Map2D& target, const Map2D& valid) {
  require_same(pred, target, "smooth_l1");
  require_same(pred, valid, "smooth_l1");
  const auto mask = (valid != 0);
  const auto n = mask.count();
  if (n == 0) return 0;
  const Map2D terms = (pred - target).unaryExpr(&huber);
  return mask.select(terms, 0.0).sum() / static_cast<double>(n);
}

double bce(const Map2D& pred, const Map2D& target, const Map2D& valid) {
  require_same(pred, target, "bce");
  require_same(pred, valid, "bce");
  const auto mask = (valid != 0);
  const auto n = mask.count();
  if (n == 0) return 0;
  const Map2D p = pred.cwiseMax(kBceEps).cwiseMin(1 - kBceEps);
  const Map2D terms = -(target * p.log() + (1 - target) * (1 - p).log());
  return mask.select(terms, 0.0).sum() / static_cast<double>(n);
}

GraspLossTerms grasp_loss(const MaskSet& pred, const GraspMaps& gt, const LossWeights& w,
                          const LossOptions& opts) {
  if (!gt.consistent()) throw DimensionMismatch("ground-truth maps differ in size");
  require_same(pred.quality, gt.quality, "grasp_loss");
  const Map2D all = Map2D::Ones(gt.rows(), gt.cols());
  const Map2D sup = support(gt, opts);

  GraspLossTerms t;
  t.p = bce(pred.quality, gt.position, all);
  t.q = smooth_l1(pred.quality, gt.quality, all);
  t.sin = smooth_l1(pred.sin2t, gt.sin2t, sup);
  t.cos = smooth_l1(pred.cos2t, gt.cos2t, sup);
  t.w = smooth_l1(pred.width, gt.width, sup);
  t.total = w.a_p * t.p + w.a_q * t.q + w.a_sin * t.sin + w.a_cos * t.cos + w.a_w * t.w;
  return t;
}

LossReport total_loss(std::span<const GraspLossTerms> per_object, const DetectionLosses& det,
                      const LossWeights& w) {
  w.validate();
  LossReport r;
  r.weights = w;
  r.l_cls = det.l_cls;
  r.l_box = det.l_box;
  r.l_imask = det.l_imask;
  r.l_smask = det.l_smask;
  if (!per_object.empty()) {
    for (const auto& t : per_object) {
      r.l_gr_p += t.p;
      r.l_gr_q += t.q;
      r.l_gr_sin += t.sin;
      r.l_gr_cos += t.cos;
      r.l_gr_w += t.w;
      r.l_gr += t.total;
    }
    const auto n = static_cast<double>(per_object.size());
    r.l_gr_p /= n;
    r.l_gr_q /= n;
    r.l_gr_sin /= n;
    r.l_gr_cos /= n;
    r.l_gr_w /= n;
    r.l_gr /= n;
  }
  r.total = w.a_cls * r.l_cls + w.a_box * r.l_box + w.a_imask * r.l_imask + w.a_gr * r.l_gr +
            w.a_smask * r.l_smask;
  return r;
}

Eigen::MatrixXd grasp_loss_gradient(const PrototypeStack& protos, const CoefficientSet& coeffs,
                                    const GraspMaps& gt, const LossWeights& w,
                                    const LossOptions& opts) {
  const MaskSet pred = assemble(protos, coeffs);
  require_same(pred.quality, gt.quality, "grasp_loss_gradient");
  const Eigen::Index hw = protos.h * protos.w;
  const double n_all = static_cast<double>(hw);
  const Map2D sup = support(gt, opts);
  const auto n_sup = static_cast<double>((sup != 0).count());

  // dL/dz per pixel and channel, laid out like the (h*w) x N pre-activation.
  Eigen::MatrixXd dz = Eigen::MatrixXd::Zero(hw, coeffs.size());
  auto column = [&](Eigen::Index j) {
    return Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        dz.col(j).data(), protos.h, protos.w);
  };
  auto slope = [&](Eigen::Index j, const Map2D& y) {
    const Activation act = coeffs.channels[static_cast<std::size_t>(j)].activation;
    return y.unaryExpr([act](double v) { return activation_slope(act, v); });
  };

  {
    const Map2D& q = pred.quality;
    const Map2D& t = gt.position;
    const Map2D in_range = ((q >= kBceEps) && (q <= 1 - kBceEps)).cast<double>();
    const Map2D d_bce = in_range * (-t / q + (1 - t) / (1 - q)) / n_all;
    const Map2D d_sl1 = (q - gt.quality).unaryExpr(&huber_slope) / n_all;
    column(kQuality) = ((w.a_p * d_bce + w.a_q * d_sl1) * slope(kQuality, q)).matrix();
  }
  if (n_sup > 0) {
    auto masked = [&](Eigen::Index j, const Map2D& y, const Map2D& target, double weight) {
      const Map2D d = (sup != 0).select((y - target).unaryExpr(&huber_slope), 0.0) / n_sup;
      column(j) = (weight * d * slope(j, y)).matrix();
    };
    masked(kSin, pred.sin2t, gt.sin2t, w.a_sin);
    masked(kCos, pred.cos2t, gt.cos2t, w.a_cos);
    masked(kWidth, pred.width, gt.width, w.a_w);
  }
  return (protos.data.transpose() * dz).transpose();
}

GradCheckResult grad_check(const PrototypeStack& protos, const CoefficientSet& coeffs,
                           const GraspMaps& gt, const LossWeights& w,
                           const GradCheckOptions& opts) {
  const double step = opts.step;
  if (!(step > 0)) throw std::invalid_argument("finite-difference step must be positive");
  if (opts.channel && (*opts.channel < 0 || *opts.channel >= coeffs.size()))
    throw std::out_of_range("gradient-check channel out of range");
  GradCheckResult res;
  res.analytic = grasp_loss_gradient(protos, coeffs, gt, w, opts.loss);
  res.numeric = Eigen::MatrixXd::Zero(coeffs.size(), coeffs.k());

  auto loss_at = [&](const CoefficientSet& c) {
    return grasp_loss(assemble(protos, c), gt, w, opts.loss).total;
  };
  CoefficientSet probe = coeffs;
  const Eigen::Index first = opts.channel.value_or(0);
  const Eigen::Index last = opts.channel ? *opts.channel + 1 : coeffs.size();
  for (Eigen::Index i = first; i < last; ++i) {
    for (Eigen::Index j = 0; j < coeffs.k(); ++j) {
      const double orig = coeffs.coeffs(i, j);
      probe.coeffs(i, j) = orig + step;
      const double up = loss_at(probe);
      probe.coeffs(i, j) = orig - step;
      const double down = loss_at(probe);
      probe.coeffs(i, j) = orig;
      const double fd = (up - down) / (2 * step);
      res.numeric(i, j) = fd;
      const double rel = std::abs(res.analytic(i, j) - fd) / std::max(1e-8, std::abs(fd));
      res.max_rel_error = std::max(res.max_rel_error, rel);
    }
  }
  return res;
}

}  // namespace graspkit
