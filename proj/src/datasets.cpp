#include "graspkit/datasets.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace graspkit {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto p = s.find(sep, start);
    out.push_back(trim(s.substr(start, p == std::string_view::npos ? p : p - start)));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_number(std::string_view tok, double& out) {
  if (tok.empty()) return false;
  if (tok.front() == '+') tok.remove_prefix(1);
  const auto* end = tok.data() + tok.size();
  const auto res = std::from_chars(tok.data(), end, out);
  return res.ec == std::errc() && res.ptr == end && std::isfinite(out);
}

double number_or_throw(std::string_view tok, std::size_t line, const char* field) {
  double v = 0;
  if (!parse_number(tok, v))
    throw ParseError(line, std::string("field '") + field + "' is not a number: '" +
                               std::string(tok) + "'");
  return v;
}

Box grasp_extent(const std::vector<GraspRect>& grasps, int height, int width) {
  Box b;
  bool first = true;
  for (const auto& g : grasps) {
    const Box gb = bounding_box(rect_to_polygon(g));
    if (first) {
      b = gb;
      first = false;
    } else {
      b = {std::min(b.x_min, gb.x_min), std::min(b.y_min, gb.y_min), std::max(b.x_max, gb.x_max),
           std::max(b.y_max, gb.y_max)};
    }
  }
  return b.clamped(width, height);
}

}  // namespace

// ---------------------------------------------------------------------------

Scene import_jacquard(std::string_view text, const std::string& scene_id, int height, int width,
                      const CodecConfig& cfg) {
  cfg.validate();
  static constexpr const char* kFields[] = {"x", "y", "theta_degrees", "opening_px", "jaw_px"};
  SceneObject obj;
  obj.class_id = 0;
  obj.class_name = "object";

  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (line.empty()) continue;
    const auto fields = split_on(line, ';');
    if (fields.size() != 5)
      throw ParseError(i + 1, "expected 5 ';'-separated fields, found " +
                                  std::to_string(fields.size()));
    double v[5];
    for (int f = 0; f < 5; ++f) v[f] = number_or_throw(fields[f], i + 1, kFields[f]);
    if (!(v[3] > 0) || !(v[4] > 0)) throw ParseError(i + 1, "opening and jaw must be positive");
    obj.grasps.emplace_back(v[0], v[1], v[2] * std::numbers::pi / 180.0, v[3], v[4], 1.0, 0);
  }
  if (obj.grasps.empty()) throw ParseError(0, "no grasps in annotation for scene " + scene_id);

  Scene scene{scene_id, height, width, {}};
  obj.box = grasp_extent(obj.grasps, height, width);
  scene.objects.push_back(std::move(obj));
  validate_scene(scene);
  return scene;
}

GraspRect rect_from_corners(const std::array<Point, 4>& c, bool first_edge_is_opening) {
  const Point m01 = (c[0] + c[1]) / 2;
  const Point m12 = (c[1] + c[2]) / 2;
  const Point m23 = (c[2] + c[3]) / 2;
  const Point m30 = (c[3] + c[0]) / 2;
  // The opening axis joins the midpoints of the two jaw edges.
  const Point axis = first_edge_is_opening ? Point(m30 - m12) : Point(m23 - m01);
  const Point across = first_edge_is_opening ? Point(m23 - m01) : Point(m30 - m12);
  const Point center = (c[0] + c[1] + c[2] + c[3]) / 4;
  const double theta = std::atan2(-axis.y(), axis.x());
  return {center.x(), center.y(), theta, axis.norm(), across.norm()};
}

Scene import_ocid(std::string_view text, const std::map<std::string, int>& class_map,
                  const std::string& scene_id, int height, int width, const CodecConfig& cfg,
                  const OcidOptions& opts) {
  cfg.validate();
  Scene scene{scene_id, height, width, {}};
  std::map<std::string, std::size_t> object_of;

  std::string current;
  std::size_t group_line = 0;
  std::vector<std::pair<Point, std::size_t>> corners;

  auto flush = [&]() {
    if (current.empty()) return;
    if (corners.size() % 4 != 0)
      throw ParseError(group_line, "class '" + current + "' group has " +
                                       std::to_string(corners.size()) +
                                       " corner lines, not a multiple of 4");
    auto [it, fresh] = object_of.try_emplace(current, scene.objects.size());
    if (fresh) {
      SceneObject obj;
      obj.class_name = current;
      obj.class_id = class_map.at(current);
      scene.objects.push_back(std::move(obj));
    }
    SceneObject& obj = scene.objects[it->second];
    for (std::size_t g = 0; g < corners.size(); g += 4) {
      const std::array<Point, 4> quad{corners[g].first, corners[g + 1].first, corners[g + 2].first,
                                      corners[g + 3].first};
      const std::size_t at = corners[g].second;
      const Polygon poly(quad.begin(), quad.end());
      if (polygon_area(poly) < 1.0) throw ParseError(at, "degenerate corner group (area < 1 px^2)");
      double sign = 0;
      for (int e = 0; e < 4; ++e) {
        const Point u = quad[(e + 1) % 4] - quad[e];
        const Point v = quad[(e + 2) % 4] - quad[(e + 1) % 4];
        const double cross = u.x() * v.y() - u.y() * v.x();
        if (sign == 0) sign = cross;
        if (cross * sign <= 0) throw ParseError(at, "non-convex corner group");
      }
      GraspRect r = rect_from_corners(quad, opts.first_edge_is_opening);
      r.class_id = obj.class_id;
      obj.grasps.push_back(r);
    }
    corners.clear();
  };

  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto toks = split_ws(line);
    double x = 0, y = 0;
    if (toks.size() == 1 && !parse_number(toks[0], x)) {
      flush();
      current = std::string(toks[0]);
      group_line = i + 1;
      if (!class_map.count(current)) throw ParseError(i + 1, "unknown class '" + current + "'");
    } else if (toks.size() == 2) {
      x = number_or_throw(toks[0], i + 1, "x");
      y = number_or_throw(toks[1], i + 1, "y");
      if (current.empty()) throw ParseError(i + 1, "corner line before any class token");
      corners.emplace_back(Point(x, y), i + 1);
    } else {
      throw ParseError(i + 1, "expected a class token or an 'x y' corner line");
    }
  }
  flush();

  if (scene.grasp_count() == 0) throw ParseError(0, "no grasps in annotation for scene " + scene_id);
  for (auto& obj : scene.objects) obj.box = grasp_extent(obj.grasps, height, width);
  validate_scene(scene);
  return scene;
}

// ---------------------------------------------------------------------------

std::size_t Tensor::numel() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

namespace {

constexpr char kMagic[4] = {'G', 'K', 'T', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

}  // namespace

std::vector<std::uint8_t> write_tensor(const Tensor& t) {
  if (t.dims.size() != 2 && t.dims.size() != 3)
    throw std::invalid_argument("tensor rank must be 2 or 3");
  if (t.data.size() != t.numel()) throw std::invalid_argument("tensor data does not match dims");
  std::vector<std::uint8_t> out;
  out.reserve(8 + 4 * t.dims.size() + 4 * t.data.size());
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, static_cast<std::uint32_t>(t.dims.size()));
  for (auto d : t.dims) put_u32(out, d);
  for (float f : t.data) {
    std::uint32_t bits;
    static_assert(sizeof(bits) == sizeof(f));
    std::memcpy(&bits, &f, sizeof(f));
    put_u32(out, bits);
  }
  return out;
}

Tensor read_tensor(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8) throw ParseError(0, "truncated header");
  if (!std::equal(kMagic, kMagic + 4, bytes.begin())) throw ParseError(0, "bad magic");
  const std::uint32_t ndim = get_u32(bytes.data() + 4);
  if (ndim != 2 && ndim != 3) throw ParseError(0, "unsupported rank " + std::to_string(ndim));
  const std::size_t header = 8 + 4 * static_cast<std::size_t>(ndim);
  if (bytes.size() < header) throw ParseError(0, "truncated header");

  Tensor t;
  std::uint64_t count = 1;
  for (std::uint32_t i = 0; i < ndim; ++i) {
    const std::uint32_t d = get_u32(bytes.data() + 8 + 4 * i);
    t.dims.push_back(d);
    if (d != 0 && count > std::numeric_limits<std::uint64_t>::max() / 4 / d)
      throw ParseError(0, "dim overflow");
    count *= d;
  }
  if (count > (std::numeric_limits<std::size_t>::max() - header) / 4)
    throw ParseError(0, "dim overflow");
  const std::size_t expected = header + 4 * static_cast<std::size_t>(count);
  if (bytes.size() < expected) throw ParseError(0, "truncated payload");
  if (bytes.size() > expected) throw ParseError(0, "trailing bytes after payload");

  t.data.resize(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < t.data.size(); ++i) {
    const std::uint32_t bits = get_u32(bytes.data() + header + 4 * i);
    std::memcpy(&t.data[i], &bits, sizeof(bits));
  }
  return t;
}

void save_tensor(const std::string& path, const Tensor& t) {
  const auto bytes = write_tensor(t);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("failed writing " + path);
}

Tensor load_tensor(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  try {
    return read_tensor(bytes);
  } catch (const ParseError& e) {
    throw ParseError(0, path + ": " + e.what());
  }
}

Tensor to_tensor(const PrototypeStack& protos) {
  Tensor t;
  t.dims = {static_cast<std::uint32_t>(protos.h), static_cast<std::uint32_t>(protos.w),
            static_cast<std::uint32_t>(protos.k())};
  t.data.resize(static_cast<std::size_t>(protos.data.size()));
  Eigen::Map<Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      t.data.data(), protos.data.rows(), protos.data.cols()) = protos.data.cast<float>();
  return t;
}

PrototypeStack to_prototypes(const Tensor& t) {
  if (t.dims.size() != 3) throw DimensionMismatch("prototype tensor must be h x w x k");
  const Eigen::Index h = t.dims[0], w = t.dims[1], k = t.dims[2];
  PrototypeStack::Matrix data =
      Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          t.data.data(), h * w, k)
          .cast<double>();
  return {h, w, std::move(data)};
}

Tensor to_tensor(const Eigen::MatrixXd& m) {
  Tensor t;
  t.dims = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
  t.data.resize(static_cast<std::size_t>(m.size()));
  Eigen::Map<Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      t.data.data(), m.rows(), m.cols()) = m.cast<float>();
  return t;
}

Eigen::MatrixXd to_matrix(const Tensor& t) {
  if (t.dims.size() != 2) throw DimensionMismatch("expected a rank-2 tensor");
  return Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
             t.data.data(), t.dims[0], t.dims[1])
      .cast<double>();
}

Tensor to_tensor(const GraspMaps& maps) {
  const auto h = static_cast<std::size_t>(maps.rows());
  const auto w = static_cast<std::size_t>(maps.cols());
  Tensor t;
  t.dims = {5, static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(w)};
  t.data.resize(5 * h * w);
  const Map2D* channels[] = {&maps.quality, &maps.position, &maps.sin2t, &maps.cos2t, &maps.width};
  for (std::size_t c = 0; c < 5; ++c) {
    Eigen::Map<MapT<float>>(t.data.data() + c * h * w, maps.rows(), maps.cols()) =
        channels[c]->cast<float>();
  }
  return t;
}

GraspMaps to_grasp_maps(const Tensor& t) {
  if (t.dims.size() != 3 || t.dims[0] != 5)
    throw DimensionMismatch("grasp map tensor must be 5 x h x w");
  const Eigen::Index h = t.dims[1], w = t.dims[2];
  GraspMaps maps(h, w);
  Map2D* channels[] = {&maps.quality, &maps.position, &maps.sin2t, &maps.cos2t, &maps.width};
  for (std::size_t c = 0; c < 5; ++c) {
    *channels[c] = Eigen::Map<const MapT<float>>(
                       t.data.data() + c * static_cast<std::size_t>(h * w), h, w)
                       .cast<double>();
  }
  return maps;
}

// ---------------------------------------------------------------------------

namespace {

struct Reader {
  std::size_t line;

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    throw ParseError(line, "schema violation at '" + path + "': " + what);
  }

  const json& field(const json& obj, const std::string& key, const std::string& path) const {
    if (!obj.is_object()) fail(path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) fail(path.empty() ? key : path + "." + key, "missing field");
    return *it;
  }

  double number(const json& j, const std::string& path) const {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
  }

  int integer(const json& j, const std::string& path) const {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
  }

  std::string string(const json& j, const std::string& path) const {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
  }

  const json& array(const json& j, const std::string& path, std::size_t size = 0) const {
    if (!j.is_array()) fail(path, "expected an array");
    if (size && j.size() != size) fail(path, "expected " + std::to_string(size) + " elements");
    return j;
  }
};

Scene scene_from_json(const json& j, std::size_t line) {
  const Reader rd{line};
  Scene s;
  s.scene_id = rd.string(rd.field(j, "scene_id", ""), "scene_id");
  const auto& size = rd.array(rd.field(j, "image_size", ""), "image_size", 2);
  s.height = rd.integer(size[0], "image_size[0]");
  s.width = rd.integer(size[1], "image_size[1]");
  const auto& objs = rd.array(rd.field(j, "objects", ""), "objects");
  for (std::size_t i = 0; i < objs.size(); ++i) {
    const std::string op = "objects[" + std::to_string(i) + "]";
    const json& jo = objs[i];
    SceneObject o;
    o.class_id = rd.integer(rd.field(jo, "class_id", op), op + ".class_id");
    o.class_name = rd.string(rd.field(jo, "class_name", op), op + ".class_name");
    const auto& box = rd.array(rd.field(jo, "box", op), op + ".box", 4);
    o.box = {rd.number(box[0], op + ".box[0]"), rd.number(box[1], op + ".box[1]"),
             rd.number(box[2], op + ".box[2]"), rd.number(box[3], op + ".box[3]")};
    if (jo.contains("score")) o.score = rd.number(jo["score"], op + ".score");
    if (jo.contains("instance_mask_ref"))
      o.instance_mask_ref = rd.string(jo["instance_mask_ref"], op + ".instance_mask_ref");
    const auto& grasps = rd.array(rd.field(jo, "grasps", op), op + ".grasps");
    for (std::size_t g = 0; g < grasps.size(); ++g) {
      const std::string gp = op + ".grasps[" + std::to_string(g) + "]";
      const json& jg = grasps[g];
      auto num = [&](const char* k) { return rd.number(rd.field(jg, k, gp), gp + "." + k); };
      try {
        o.grasps.emplace_back(num("x"), num("y"), num("theta"), num("width"), num("height"),
                              num("quality"), o.class_id);
      } catch (const std::invalid_argument& e) {
        rd.fail(gp, e.what());
      }
    }
    s.objects.push_back(std::move(o));
  }
  try {
    validate_scene(s);
  } catch (const std::invalid_argument& e) {
    throw ParseError(line, e.what());
  }
  return s;
}

json scene_to_json(const Scene& s) {
  json objs = json::array();
  for (const auto& o : s.objects) {
    json grasps = json::array();
    for (const auto& g : o.grasps) {
      grasps.push_back({{"x", g.x},
                        {"y", g.y},
                        {"theta", g.theta},
                        {"width", g.width},
                        {"height", g.height},
                        {"quality", g.quality}});
    }
    json jo = {{"class_id", o.class_id},
               {"class_name", o.class_name},
               {"box", {o.box.x_min, o.box.y_min, o.box.x_max, o.box.y_max}},
               {"grasps", std::move(grasps)}};
    if (o.score) jo["score"] = *o.score;
    if (o.instance_mask_ref) jo["instance_mask_ref"] = *o.instance_mask_ref;
    objs.push_back(std::move(jo));
  }
  return {{"scene_id", s.scene_id},
          {"image_size", {s.height, s.width}},
          {"objects", std::move(objs)}};
}

}  // namespace

std::vector<Scene> read_scenes(std::istream& in) {
  std::vector<Scene> scenes;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(n, std::string("invalid JSON: ") + e.what());
    }
    scenes.push_back(scene_from_json(j, n));
  }
  return scenes;
}

void write_scenes(std::ostream& out, const std::vector<Scene>& scenes) {
  for (const auto& s : scenes) out << scene_to_json(s).dump() << '\n';
}

std::vector<Scene> load_scenes(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  try {
    return read_scenes(f);
  } catch (const ParseError& e) {
    throw ParseError(0, path + ": " + e.what());
  }
}

void save_scenes(const std::string& path, const std::vector<Scene>& scenes) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path + " for writing");
  write_scenes(f, scenes);
  if (!f) throw IoError("failed writing " + path);
}

}  // namespace graspkit
