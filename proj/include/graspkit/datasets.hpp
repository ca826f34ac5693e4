#pragma once

#include "graspkit/assembly.hpp"
#include "graspkit/maskcodec.hpp"
#include "graspkit/scene.hpp"

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace graspkit {

/// Malformed input text; `line` is 1-based (0 when not line-specific).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& msg)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Annotation importers

/// Jacquard-style text: one grasp per line, `x;y;theta_deg;opening;jaw`.
/// Produces a single class-agnostic object (class 0, "object").
Scene import_jacquard(std::string_view text, const std::string& scene_id, int height, int width,
                      const CodecConfig& cfg = {});

struct OcidOptions {
  /// When false, the first corner edge is the jaw side and the second the
  /// opening side. Set to swap that convention for a dataset.
  bool first_edge_is_opening = false;
};

/// OCID-style text. A line holding a single non-numeric token names the class
/// for the corner lines that follow; each corner line is `x y`, and every four
/// consecutive corners under a class form one grasp rectangle. Grasps are
/// grouped into one object per class.
Scene import_ocid(std::string_view text, const std::map<std::string, int>& class_map,
                  const std::string& scene_id, int height, int width, const CodecConfig& cfg = {},
                  const OcidOptions& opts = {});

/// Center, angle and extents from four ordered corners, via edge midpoints.
GraspRect rect_from_corners(const std::array<Point, 4>& corners, bool first_edge_is_opening = false);

// ---------------------------------------------------------------------------
// GKT1 tensor files: "GKT1", u32 ndim, u32 dims[ndim], f32 payload, all
// little-endian, row-major with the last dimension fastest.

struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  std::size_t numel() const;
  friend bool operator==(const Tensor&, const Tensor&) = default;
};

std::vector<std::uint8_t> write_tensor(const Tensor& t);
Tensor read_tensor(const std::vector<std::uint8_t>& bytes);
void save_tensor(const std::string& path, const Tensor& t);
Tensor load_tensor(const std::string& path);

Tensor to_tensor(const PrototypeStack& protos);
PrototypeStack to_prototypes(const Tensor& t);
Tensor to_tensor(const Eigen::MatrixXd& m);
Eigen::MatrixXd to_matrix(const Tensor& t);
/// 5 x h x w, channels in order quality, position, sin2t, cos2t, width.
Tensor to_tensor(const GraspMaps& maps);
GraspMaps to_grasp_maps(const Tensor& t);

// ---------------------------------------------------------------------------
// JSON-lines scene files. Angles are radians; box is [x_min, y_min, x_max, y_max].

std::vector<Scene> read_scenes(std::istream& in);
void write_scenes(std::ostream& out, const std::vector<Scene>& scenes);
std::vector<Scene> load_scenes(const std::string& path);
void save_scenes(const std::string& path, const std::vector<Scene>& scenes);

}  // namespace graspkit
