#pragma once

#include "graspkit/geometry.hpp"
#include "graspkit/maskcodec.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace graspkit {

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Bank of k basis maps at h x w. Stored as an (h*w) x k row-major matrix,
/// which is exactly the byte order of an h x w x k tensor file.
template <typename Scalar>
struct PrototypeStackT {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Eigen::Index h = 0;
  Eigen::Index w = 0;
  Matrix data;

  PrototypeStackT() = default;
  PrototypeStackT(Eigen::Index h_, Eigen::Index w_, Eigen::Index k)
      : h(h_), w(w_), data(Matrix::Zero(h_ * w_, k)) {}
  PrototypeStackT(Eigen::Index h_, Eigen::Index w_, Matrix d) : h(h_), w(w_), data(std::move(d)) {
    if (data.rows() != h * w) throw DimensionMismatch("prototype rows must equal h*w");
  }

  Eigen::Index k() const { return data.cols(); }
  /// Prototype j viewed as an h x w map.
  MapT<Scalar> prototype(Eigen::Index j) const {
    MapT<Scalar> m(h, w);
    Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(m.data(), h * w) = data.col(j);
    return m;
  }
};

enum class Activation { Logistic, Tanh, Identity };

/// Largest representable value below 1. Saturated activations are clamped to
/// it (and to the smallest positive normal) so bounded channels stay inside
/// their open intervals.
template <typename Scalar>
inline const Scalar kBelowOne = std::nextafter(Scalar(1), Scalar(0));

template <typename Scalar>
Scalar activate(Activation a, Scalar z) {
  switch (a) {
    case Activation::Logistic:
      return std::clamp(Scalar(1) / (Scalar(1) + std::exp(-z)),
                        std::numeric_limits<Scalar>::min(), kBelowOne<Scalar>);
    case Activation::Tanh:
      return std::clamp(std::tanh(z), -kBelowOne<Scalar>, kBelowOne<Scalar>);
    case Activation::Identity:
      break;
  }
  return z;
}

struct ChannelSpec {
  std::string name;
  Activation activation = Activation::Logistic;
};

/// The standard five coefficient channels, in storage order.
inline const std::vector<ChannelSpec>& standard_channels() {
  static const std::vector<ChannelSpec> kChannels{{"instance", Activation::Logistic},
                                                  {"quality", Activation::Logistic},
                                                  {"sin2t", Activation::Tanh},
                                                  {"cos2t", Activation::Tanh},
                                                  {"width", Activation::Logistic}};
  return kChannels;
}

inline constexpr Eigen::Index kInstance = 0;
inline constexpr Eigen::Index kQuality = 1;
inline constexpr Eigen::Index kSin = 2;
inline constexpr Eigen::Index kCos = 3;
inline constexpr Eigen::Index kWidth = 4;
inline constexpr Eigen::Index kStandardChannels = 5;

/// N x k coefficients for one detection. Rows 0..4 are the standard channels;
/// further rows are optional extra heads (e.g. affordances) with their own
/// activation.
template <typename Scalar>
struct CoefficientSetT {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  std::vector<ChannelSpec> channels = standard_channels();
  Matrix coeffs;

  CoefficientSetT() = default;
  explicit CoefficientSetT(Eigen::Index k) : coeffs(Matrix::Zero(kStandardChannels, k)) {}
  explicit CoefficientSetT(Matrix c) : coeffs(std::move(c)) {
    if (coeffs.rows() != kStandardChannels)
      throw DimensionMismatch("standard coefficient set needs 5 rows");
  }

  Eigen::Index k() const { return coeffs.cols(); }
  Eigen::Index size() const { return coeffs.rows(); }

  void add_channel(ChannelSpec spec, const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>& row) {
    if (row.size() != k()) throw DimensionMismatch("extra channel length differs from k");
    for (const auto& c : channels)
      if (c.name == spec.name) throw std::invalid_argument("duplicate channel " + spec.name);
    coeffs.conservativeResize(coeffs.rows() + 1, Eigen::NoChange);
    coeffs.row(coeffs.rows() - 1) = row;
    channels.push_back(std::move(spec));
  }

  Eigen::Index index_of(const std::string& name) const {
    for (std::size_t i = 0; i < channels.size(); ++i)
      if (channels[i].name == name) return static_cast<Eigen::Index>(i);
    throw std::out_of_range("no coefficient channel named " + name);
  }
};

template <typename Scalar>
struct MaskSetT {
  MapT<Scalar> instance;
  MapT<Scalar> quality;
  MapT<Scalar> sin2t;
  MapT<Scalar> cos2t;
  MapT<Scalar> width;
  std::vector<std::pair<std::string, MapT<Scalar>>> extras;
};

/// Pre-activation maps, one column per channel: P * C^T, (h*w) x N.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> assemble_linear(
    const PrototypeStackT<Scalar>& protos, const CoefficientSetT<Scalar>& coeffs) {
  if (coeffs.k() != protos.k())
    throw DimensionMismatch("coefficient length " + std::to_string(coeffs.k()) +
                            " does not match prototype count " + std::to_string(protos.k()));
  if (static_cast<std::size_t>(coeffs.size()) != coeffs.channels.size())
    throw DimensionMismatch("coefficient rows do not match channel specs");
  return protos.data * coeffs.coeffs.transpose();
}

namespace detail {

template <typename Scalar, typename In>
void activate_into(Activation act, const In& in, Eigen::Map<Eigen::Array<Scalar, Eigen::Dynamic, 1>> out) {
  switch (act) {
    case Activation::Logistic:
      out = (Scalar(1) + (-in).exp())
                .inverse()
                .cwiseMax(std::numeric_limits<Scalar>::min())
                .cwiseMin(kBelowOne<Scalar>);
      break;
    case Activation::Tanh:
      // 1 - 2 / (e^{2z} + 1); Eigen has no packet tanh for double.
      out = (Scalar(1) - Scalar(2) * ((Scalar(2) * in).exp() + Scalar(1)).inverse())
                .cwiseMax(-kBelowOne<Scalar>)
                .cwiseMin(kBelowOne<Scalar>);
      break;
    case Activation::Identity:
      out = in;
      break;
  }
}

struct PixelRange {
  Eigen::Index r0, r1, c0, c1;
};

// Pixels whose centers fall inside the half-open box, clipped to h x w.
inline PixelRange pixel_range(const Box& box, Eigen::Index h, Eigen::Index w) {
  auto first = [](double v, Eigen::Index n) {
    return std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::ceil(v)), 0, n);
  };
  const Eigen::Index r0 = first(box.y_min, h), c0 = first(box.x_min, w);
  return {r0, std::max(r0, first(box.y_max, h)), c0, std::max(c0, first(box.x_max, w))};
}

template <typename Scalar>
MaskSetT<Scalar> split_channels(const std::vector<ChannelSpec>& channels,
                                std::vector<MapT<Scalar>> maps) {
  MaskSetT<Scalar> out;
  out.instance = std::move(maps[kInstance]);
  out.quality = std::move(maps[kQuality]);
  out.sin2t = std::move(maps[kSin]);
  out.cos2t = std::move(maps[kCos]);
  out.width = std::move(maps[kWidth]);
  for (std::size_t j = kStandardChannels; j < maps.size(); ++j)
    out.extras.emplace_back(channels[j].name, std::move(maps[j]));
  return out;
}

}  // namespace detail

/// M = Activation(P C^T), with the per-channel activation of each head.
template <typename Scalar>
MaskSetT<Scalar> assemble(const PrototypeStackT<Scalar>& protos,
                          const CoefficientSetT<Scalar>& coeffs) {
  if (coeffs.size() < kStandardChannels)
    throw DimensionMismatch("coefficient set lacks the standard channels");
  const auto pre = assemble_linear(protos, coeffs);
  std::vector<MapT<Scalar>> maps;
  for (Eigen::Index j = 0; j < coeffs.size(); ++j) {
    MapT<Scalar> m(protos.h, protos.w);
    detail::activate_into<Scalar>(coeffs.channels[static_cast<std::size_t>(j)].activation,
                                  pre.col(j).array(),
                                  {m.data(), protos.h * protos.w});
    maps.push_back(std::move(m));
  }
  return detail::split_channels(coeffs.channels, std::move(maps));
}

/// Same result as crop_masks(assemble(protos, coeffs), box), but the product
/// and the activations are only evaluated for pixels inside the box.
template <typename Scalar>
MaskSetT<Scalar> assemble_cropped(const PrototypeStackT<Scalar>& protos,
                                  const CoefficientSetT<Scalar>& coeffs, const Box& box) {
  if (coeffs.size() < kStandardChannels)
    throw DimensionMismatch("coefficient set lacks the standard channels");
  if (coeffs.k() != protos.k())
    throw DimensionMismatch("coefficient length " + std::to_string(coeffs.k()) +
                            " does not match prototype count " + std::to_string(protos.k()));
  const auto px = detail::pixel_range(box, protos.h, protos.w);
  const Eigen::Index bh = px.r1 - px.r0, bw = px.c1 - px.c0;

  typename PrototypeStackT<Scalar>::Matrix rows(bh * bw, protos.k());
  for (Eigen::Index r = 0; r < bh; ++r)
    rows.middleRows(r * bw, bw) = protos.data.middleRows((px.r0 + r) * protos.w + px.c0, bw);
  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> pre =
      rows * coeffs.coeffs.transpose();

  std::vector<MapT<Scalar>> maps;
  MapT<Scalar> inner(bh, bw);
  for (Eigen::Index j = 0; j < coeffs.size(); ++j) {
    detail::activate_into<Scalar>(coeffs.channels[static_cast<std::size_t>(j)].activation,
                                  pre.col(j).array(), {inner.data(), bh * bw});
    MapT<Scalar> m = MapT<Scalar>::Zero(protos.h, protos.w);
    m.block(px.r0, px.c0, bh, bw) = inner;
    maps.push_back(std::move(m));
  }
  return detail::split_channels(coeffs.channels, std::move(maps));
}

/// Zero everything outside the half-open box; dimensions are unchanged.
template <typename Derived>
MapT<typename Derived::Scalar> crop_mask(const Eigen::ArrayBase<Derived>& mask, const Box& box) {
  using Scalar = typename Derived::Scalar;
  const auto px = detail::pixel_range(box, mask.rows(), mask.cols());
  MapT<Scalar> out = MapT<Scalar>::Zero(mask.rows(), mask.cols());
  out.block(px.r0, px.c0, px.r1 - px.r0, px.c1 - px.c0) =
      mask.block(px.r0, px.c0, px.r1 - px.r0, px.c1 - px.c0);
  return out;
}

template <typename Scalar>
MaskSetT<Scalar> crop_masks(const MaskSetT<Scalar>& m, const Box& box) {
  MaskSetT<Scalar> out;
  out.instance = crop_mask(m.instance, box);
  out.quality = crop_mask(m.quality, box);
  out.sin2t = crop_mask(m.sin2t, box);
  out.cos2t = crop_mask(m.cos2t, box);
  out.width = crop_mask(m.width, box);
  for (const auto& [name, map] : m.extras) out.extras.emplace_back(name, crop_mask(map, box));
  return out;
}

using PrototypeStack = PrototypeStackT<double>;
using CoefficientSet = CoefficientSetT<double>;
using MaskSet = MaskSetT<double>;

}  // namespace graspkit
