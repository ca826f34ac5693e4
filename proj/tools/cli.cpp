#include "graspkit/cli.hpp"

#include "graspkit/datasets.hpp"
#include "graspkit/evaluator.hpp"
#include "graspkit/fixture.hpp"
#include "graspkit/inference.hpp"
#include "graspkit/parallel.hpp"
#include "graspkit/selftest.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

namespace graspkit::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/// Bad input from the command line or from a named file; maps to exit 2.
class UserError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr double kDeg = std::numbers::pi / 180.0;

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
  auto log = std::make_shared<spdlog::logger>(
      "graspkit", std::make_shared<spdlog::sinks::ostream_sink_st>(err, true));
  log->set_pattern("[%l] %v");
  log->set_level(spdlog::level::warn);
  if (const char* env = std::getenv("GRASPKIT_LOG")) {
    static const std::map<std::string, spdlog::level::level_enum> kLevels{
        {"error", spdlog::level::err},
        {"warn", spdlog::level::warn},
        {"info", spdlog::level::info},
        {"debug", spdlog::level::debug}};
    if (auto it = kLevels.find(env); it != kLevels.end())
      log->set_level(it->second);
    else
      log->warn("ignoring GRASPKIT_LOG='{}' (expected error, warn, info or debug)", env);
  }
  return log;
}

std::string read_text(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw IoError("cannot open " + p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Output either to a file or to the run's stdout stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (path.empty()) {
      os_ = &fallback;
      return;
    }
    file_.open(path, std::ios::binary);
    if (!file_) throw IoError("cannot open " + path + " for writing");
    os_ = &file_;
  }
  std::ostream& stream() { return *os_; }
  void close(const std::string& path) {
    if (file_.is_open()) {
      file_.close();
      if (!file_) throw IoError("failed writing " + path);
    } else {
      os_->flush();
    }
  }

 private:
  std::ofstream file_;
  std::ostream* os_ = nullptr;
};

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw IoError("cannot create directory " + dir.string() + (ec ? ": " + ec.message() : ""));
}

void check_scene_id(const std::string& id) {
  if (id.empty() || id == "." || id == ".." || id.find_first_of("/\\") != std::string::npos)
    throw UserError("scene id '" + id + "' cannot be used as a directory name");
}

struct Shared {
  CodecConfig codec;
  double angle_thr_deg = 30;
  MetricConfig metric;
  NmsParams nms;
  int parallelism = 1;
  std::uint64_t seed = 0;
  std::string out;
  int top_n = 1;
};

void add_codec_flags(CLI::App* app, Shared& s) {
  app->add_option("--width-max", s.codec.width_max, "Opening width that maps to 1.0")
      ->capture_default_str();
  app->add_option("--center-fraction", s.codec.center_fraction,
                  "Central fraction of the opening carrying angle and width")
      ->capture_default_str();
  app->add_option("--q-min", s.codec.q_min, "Quality threshold for decoded grasps")
      ->capture_default_str();
}

void add_parallelism(CLI::App* app, Shared& s) {
  app->add_option("--parallelism", s.parallelism, "Worker threads")
      ->check(CLI::Range(1, 1024))
      ->capture_default_str();
}

void add_metric_flags(CLI::App* app, Shared& s, bool thresholds) {
  if (thresholds) {
    app->add_option("--iou-thr", s.metric.iou_thr, "Rectangle IoU a grasp must exceed")
        ->capture_default_str();
    app->add_option("--angle-thr", s.angle_thr_deg, "Maximum angle error in degrees")
        ->capture_default_str();
  }
  app->add_option("--top-n", s.metric.top_n, "Predicted grasps scored per object")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

// ---------------------------------------------------------------------------
// import

std::vector<fs::path> annotation_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw UserError(dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw UserError("no annotation files found in " + dir.string());
  return files;
}

std::string jacquard_scene_id(const fs::path& p) {
  std::string stem = p.stem().string();
  const std::string suffix = "_grasps";
  if (stem.size() > suffix.size() && stem.ends_with(suffix)) stem.resize(stem.size() - suffix.size());
  return stem;
}

bool is_number(std::string_view tok) {
  double v;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

// Class names in order of sorted name, numbered from 0.
std::map<std::string, int> scan_ocid_classes(const std::vector<std::string>& texts) {
  std::set<std::string> names;
  for (const auto& text : texts) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      std::vector<std::string> toks;
      for (std::string t; ls >> t;) toks.push_back(t);
      if (toks.size() == 1 && !is_number(toks[0])) names.insert(toks[0]);
    }
  }
  std::map<std::string, int> ids;
  for (const auto& n : names) ids.emplace(n, static_cast<int>(ids.size()));
  return ids;
}

std::map<std::string, int> read_class_map(const std::string& path) {
  std::istringstream in(read_text(path));
  std::map<std::string, int> ids;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    std::istringstream ls(line);
    std::string name;
    int id;
    if (!(ls >> name)) continue;
    if (!(ls >> id) || id < 0) throw UserError(path + ": line " + std::to_string(n) + ": expected 'name id'");
    if (!ids.emplace(name, id).second)
      throw UserError(path + ": line " + std::to_string(n) + ": duplicate class '" + name + "'");
  }
  return ids;
}

int cmd_import(const std::string& format, const std::string& in_dir, int height, int width,
               const std::string& classes_path, bool first_edge_is_opening, const Shared& s,
               std::ostream& out, spdlog::logger& log) {
  s.codec.validate();
  if (height <= 0 || width <= 0) throw UserError("--height and --width must be positive");
  const auto files = annotation_files(in_dir);
  std::vector<std::string> texts(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) texts[i] = read_text(files[i]);

  std::map<std::string, int> classes;
  if (format == "ocid")
    classes = classes_path.empty() ? scan_ocid_classes(texts) : read_class_map(classes_path);

  std::vector<Scene> scenes(files.size());
  parallel_for(files.size(), s.parallelism, [&](std::size_t i) {
    try {
      if (format == "jacquard") {
        scenes[i] = import_jacquard(texts[i], jacquard_scene_id(files[i]), height, width, s.codec);
      } else {
        OcidOptions opts;
        opts.first_edge_is_opening = first_edge_is_opening;
        scenes[i] = import_ocid(texts[i], classes, files[i].stem().string(), height, width,
                                s.codec, opts);
      }
    } catch (const std::exception& e) {
      throw UserError(files[i].string() + ": " + e.what());
    }
  });

  std::set<std::string> seen;
  std::size_t n_objects = 0, n_grasps = 0;
  for (const auto& sc : scenes) {
    if (!seen.insert(sc.scene_id).second) throw UserError("duplicate scene id '" + sc.scene_id + "'");
    n_objects += sc.objects.size();
    n_grasps += sc.grasp_count();
    log.debug("{}: {} objects, {} grasps", sc.scene_id, sc.objects.size(), sc.grasp_count());
  }
  save_scenes(s.out, scenes);
  out << "imported " << scenes.size() << " scenes, " << n_objects << " objects, " << n_grasps
      << " grasps\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// encode / decode

int cmd_encode(const std::string& scenes_path, const Shared& s, std::ostream& out,
               std::ostream& err, spdlog::logger& log) {
  s.codec.validate();
  const auto scenes = load_scenes(scenes_path);
  const fs::path root(s.out);
  make_dirs(root);

  std::vector<std::string> problems(scenes.size());
  std::vector<std::size_t> written(scenes.size(), 0);
  parallel_for(scenes.size(), s.parallelism, [&](std::size_t i) {
    const Scene& sc = scenes[i];
    try {
      check_scene_id(sc.scene_id);
      validate_scene(sc);
      const fs::path dir = root / sc.scene_id;
      make_dirs(dir);
      for (std::size_t j = 0; j < sc.objects.size(); ++j) {
        const auto maps = encode_grasps(sc.objects[j].grasps, sc.height, sc.width, s.codec);
        save_tensor((dir / (std::to_string(j) + ".gkt")).string(), to_tensor(maps));
        ++written[i];
      }
    } catch (const IoError&) {
      throw;
    } catch (const std::exception& e) {
      problems[i] = e.what();
    }
  });

  bool failed = false;
  std::size_t total = 0;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    total += written[i];
    if (!problems[i].empty()) {
      err << "scene " << scenes[i].scene_id << ": " << problems[i] << "\n";
      failed = true;
    }
  }
  log.info("wrote {} tensors under {}", total, root.string());
  out << "encoded " << total << " objects from " << scenes.size() << " scenes\n";
  return failed ? kExitUser : kExitOk;
}

json grasp_json(const GraspRect& g) {
  return {{"x", g.x}, {"y", g.y}, {"theta", g.theta}, {"width", g.width}, {"height", g.height},
          {"quality", g.quality}, {"class_id", g.class_id}};
}

int cmd_decode(const std::string& tensor_path, const Shared& s, std::ostream& out) {
  s.codec.validate();
  if (s.top_n < 1) throw UserError("--top-n must be at least 1");
  const GraspMaps maps = to_grasp_maps(load_tensor(tensor_path));
  const Box full{0, 0, static_cast<double>(maps.cols()), static_cast<double>(maps.rows())};
  const auto grasps = decode_grasps(maps, full, s.top_n, s.codec);
  Sink sink(s.out, out);
  for (const auto& g : grasps) sink.stream() << grasp_json(g).dump() << "\n";
  sink.close(s.out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// fit-fixture / infer

int cmd_fit_fixture(const FixtureOptions& base, const Shared& s, std::ostream& out,
                    spdlog::logger& log) {
  FixtureOptions opts = base;
  opts.seed = s.seed;
  const auto fixture = make_fit_fixture(opts, s.codec);

  const fs::path root(s.out);
  make_dirs(root / "protos");
  make_dirs(root / "coeffs");
  std::vector<Scene> gt;
  std::ostringstream lines;
  std::size_t n_dets = 0;
  for (const auto& f : fixture) {
    gt.push_back(f.gt);
    const std::string protos_rel = "protos/" + f.gt.scene_id + ".gkt";
    save_tensor((root / protos_rel).string(), to_tensor(f.protos));
    json dets = json::array();
    for (std::size_t j = 0; j < f.dets.size(); ++j) {
      const auto& d = f.dets[j];
      const std::string coeffs_rel = "coeffs/" + f.gt.scene_id + "_" + std::to_string(j) + ".gkt";
      save_tensor((root / coeffs_rel).string(), to_tensor(Eigen::MatrixXd(d.coeffs.coeffs)));
      dets.push_back({{"class_id", d.class_id},
                      {"class_name", d.class_name},
                      {"score", d.score},
                      {"box", {d.box.x_min, d.box.y_min, d.box.x_max, d.box.y_max}},
                      {"coeffs", coeffs_rel}});
    }
    n_dets += f.dets.size();
    lines << json{{"scene_id", f.gt.scene_id}, {"prototypes", protos_rel}, {"detections", dets}}.dump()
          << "\n";
  }
  save_scenes((root / "gt.jsonl").string(), gt);
  {
    const auto path = (root / "detections.jsonl").string();
    Sink sink(path, out);
    sink.stream() << lines.str();
    sink.close(path);
  }
  log.info("fixture written to {}", root.string());
  out << "fixture: " << fixture.size() << " scenes, " << n_dets << " detections\n";
  return kExitOk;
}

struct DetectionRecord {
  std::string scene_id;
  fs::path prototypes;
  std::vector<Detection> dets;
};

std::vector<DetectionRecord> read_detections(const std::string& path,
                                             const std::optional<fs::path>& protos_override) {
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    const fs::path q(p);
    return q.is_absolute() ? q : base / q;
  };
  std::istringstream in(read_text(path));
  std::vector<DetectionRecord> records;
  std::set<std::string> seen;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& msg) -> UserError {
      return UserError(path + ": line " + std::to_string(n) + ": " + msg);
    };
    try {
      const json j = json::parse(line);
      DetectionRecord r;
      r.scene_id = j.at("scene_id").get<std::string>();
      if (!seen.insert(r.scene_id).second) throw fail("duplicate scene id '" + r.scene_id + "'");
      if (protos_override)
        r.prototypes = *protos_override;
      else if (j.contains("prototypes"))
        r.prototypes = resolve(j.at("prototypes").get<std::string>());
      else
        throw fail("no 'prototypes' path and no --protos given");
      for (const auto& d : j.at("detections")) {
        Detection det;
        det.class_id = d.at("class_id").get<int>();
        if (det.class_id < 0) throw fail("negative class_id");
        det.class_name = d.value("class_name", std::string("object"));
        det.score = d.at("score").get<double>();
        const auto b = d.at("box").get<std::vector<double>>();
        if (b.size() != 4) throw fail("box needs 4 numbers");
        det.box = Box{b[0], b[1], b[2], b[3]};
        if (!(det.box.x_max >= det.box.x_min && det.box.y_max >= det.box.y_min))
          throw fail("box has negative extent");
        const auto coeffs = to_matrix(load_tensor(resolve(d.at("coeffs").get<std::string>()).string()));
        det.coeffs = CoefficientSet(coeffs);
        r.dets.push_back(std::move(det));
      }
      records.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw fail(e.what());
    } catch (const DimensionMismatch& e) {
      throw fail(e.what());
    } catch (const ParseError& e) {
      throw fail(e.what());
    }
  }
  return records;
}

int cmd_infer(const std::string& dets_path, const std::string& protos_path, const Shared& s,
              std::ostream& out, spdlog::logger& log) {
  s.codec.validate();
  if (s.top_n < 1) throw UserError("--top-n must be at least 1");
  std::optional<fs::path> override_path;
  if (!protos_path.empty()) override_path = protos_path;
  const auto records = read_detections(dets_path, override_path);

  std::optional<PrototypeStack> shared_protos;
  if (override_path) shared_protos = to_prototypes(load_tensor(override_path->string()));

  InferOptions opts;
  opts.top_n = s.top_n;
  std::vector<Scene> preds(records.size());
  parallel_for(records.size(), s.parallelism, [&](std::size_t i) {
    const auto& r = records[i];
    try {
      const PrototypeStack protos =
          shared_protos ? *shared_protos : to_prototypes(load_tensor(r.prototypes.string()));
      preds[i] = infer_scene(r.scene_id, protos, r.dets, s.codec, s.nms, opts).scene;
    } catch (const std::invalid_argument& e) {
      throw UserError("scene " + r.scene_id + ": " + e.what());
    }
    log.debug("{}: {} detections kept", r.scene_id, preds[i].objects.size());
  });

  Sink sink(s.out, out);
  write_scenes(sink.stream(), preds);
  sink.close(s.out);
  log.info("inferred {} scenes", preds.size());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval / sweep

int cmd_eval(const std::string& pred_path, const std::string& gt_path, Shared s,
             std::ostream& out) {
  s.metric.angle_thr = s.angle_thr_deg * kDeg;
  s.metric.validate();
  const auto pred = load_scenes(pred_path);
  const auto gt = load_scenes(gt_path);
  const auto report = evaluate(pred, gt, s.metric);
  Sink sink(s.out, out);
  sink.stream() << report_to_json(report, s.metric) << "\n";
  sink.close(s.out);
  return kExitOk;
}

int cmd_sweep(const std::string& pred_path, const std::string& gt_path, const Shared& s,
              std::ostream& out) {
  s.metric.validate();
  const auto pred = load_scenes(pred_path);
  const auto gt = load_scenes(gt_path);
  const auto cells =
      threshold_sweep(pred, gt, default_sweep_ious(), default_sweep_angles(), s.metric);
  Sink sink(s.out, out);
  write_sweep_csv(sink.stream(), cells);
  sink.close(s.out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// gradcheck / selftest

void print_suite(std::ostream& out, const SuiteResult& r) {
  out << r.name << ": " << r.passed << "/" << r.total << " passed (worst " << r.worst << ", "
      << r.seconds << " s)\n";
}

int cmd_gradcheck(int trials, Eigen::Index k, double step, double tol, const LossWeights& w,
                  const Shared& s, std::ostream& out) {
  w.validate();
  if (trials < 1 || k < 1) throw UserError("--trials and --k must be positive");
  if (!(step > 0) || !(tol > 0)) throw UserError("--step and --tol must be positive");
  const auto r = check_gradients(s.seed, trials, k, step, tol, w);
  print_suite(out, r);
  return r.ok() ? kExitOk : kExitInternal;
}

int cmd_selftest(double iou_bias, const Shared& s, std::ostream& out) {
  SelftestOptions opts;
  opts.seed = s.seed;
  opts.iou_bias = iou_bias;
  bool ok = true;
  for (const auto& r : run_selftest(opts)) {
    print_suite(out, r);
    ok = ok && r.ok();
  }
  out << "selftest: " << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? kExitOk : kExitInternal;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto log = make_logger(err);

  CLI::App app{"Grasp rectangle, grasp map and evaluation toolkit", "graspkit"};
  app.require_subcommand(1);
  Shared s;

  auto* imp = app.add_subcommand("import", "Convert a directory of annotation files to scenes");
  std::string format, in_dir, classes_path;
  int height = 0, width = 0;
  bool first_edge_is_opening = false;
  imp->add_option("--format", format, "Annotation format")
      ->required()
      ->check(CLI::IsMember({"jacquard", "ocid"}));
  imp->add_option("input", in_dir, "Directory of .txt annotation files")->required();
  imp->add_option("--out", s.out, "Output scenes file (JSON lines)")->required();
  imp->add_option("--height", height, "Image height (default 1024 jacquard, 480 ocid)");
  imp->add_option("--width", width, "Image width (default 1024 jacquard, 640 ocid)");
  imp->add_option("--classes", classes_path, "Class map file with 'name id' lines (ocid)");
  imp->add_flag("--first-edge-opening", first_edge_is_opening,
                "First corner edge spans the opening (ocid)");
  add_codec_flags(imp, s);
  add_parallelism(imp, s);

  auto* enc = app.add_subcommand("encode", "Rasterize every object's grasps into map tensors");
  std::string scenes_path;
  enc->add_option("scenes", scenes_path, "Scenes file (JSON lines)")->required();
  enc->add_option("--out", s.out, "Output directory")->required();
  add_codec_flags(enc, s);
  add_parallelism(enc, s);

  auto* dec = app.add_subcommand("decode", "Decode grasps from a 5 x h x w map tensor");
  std::string tensor_path;
  dec->add_option("tensor", tensor_path, "Grasp map tensor file")->required();
  dec->add_option("--out", s.out, "Output file (default stdout)");
  dec->add_option("--top-n", s.top_n, "Grasps to report")->capture_default_str();
  add_codec_flags(dec, s);

  auto* fit = app.add_subcommand("fit-fixture",
                                 "Write a synthetic prototype/coefficient fixture and its ground truth");
  FixtureOptions fixture;
  fit->add_option("--out", s.out, "Output directory")->required();
  fit->add_option("--seed", s.seed, "Random seed")->capture_default_str();
  fit->add_option("--scenes", fixture.n_scenes, "Number of scenes")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  fit->add_option("--size", fixture.height, "Image side in pixels")
      ->check(CLI::Range(32, 4096))
      ->capture_default_str();
  fit->add_option("--k", fixture.k, "Prototype count")->capture_default_str();
  add_codec_flags(fit, s);

  auto* inf = app.add_subcommand("infer", "Assemble and decode detections into predicted scenes");
  std::string dets_path, protos_path;
  inf->add_option("detections", dets_path, "Detections file (JSON lines)")->required();
  inf->add_option("--protos", protos_path, "Prototype tensor used for every scene");
  inf->add_option("--out", s.out, "Output scenes file (default stdout)");
  inf->add_option("--nms-iou", s.nms.iou_thr, "Box IoU above which NMS suppresses")
      ->capture_default_str();
  inf->add_option("--score-thr", s.nms.score_thr, "Minimum detection score")
      ->capture_default_str();
  inf->add_option("--top-n", s.top_n, "Grasps decoded per detection")->capture_default_str();
  add_codec_flags(inf, s);
  add_parallelism(inf, s);

  auto* ev = app.add_subcommand("eval", "Score predicted scenes against ground truth (JSON)");
  std::string pred_path, gt_path;
  ev->add_option("predictions", pred_path, "Predicted scenes file")->required();
  ev->add_option("ground_truth", gt_path, "Ground-truth scenes file")->required();
  ev->add_option("--out", s.out, "Report file (default stdout)");
  add_metric_flags(ev, s, true);

  auto* sw = app.add_subcommand("sweep", "Accuracy over the IoU x angle threshold grid (CSV)");
  sw->add_option("predictions", pred_path, "Predicted scenes file")->required();
  sw->add_option("ground_truth", gt_path, "Ground-truth scenes file")->required();
  sw->add_option("--out", s.out, "CSV file (default stdout)");
  add_metric_flags(sw, s, false);

  auto* gc = app.add_subcommand("gradcheck", "Analytic versus finite-difference loss gradients");
  int trials = 20;
  Eigen::Index k = 16;
  double step = 1e-3, tol = 1e-4;
  LossWeights weights;
  gc->add_option("--seed", s.seed, "Random seed")->capture_default_str();
  gc->add_option("--trials", trials, "Random problems")->capture_default_str();
  gc->add_option("--k", k, "Coefficient vector length")->capture_default_str();
  gc->add_option("--step", step, "Central difference step")->capture_default_str();
  gc->add_option("--tol", tol, "Maximum relative error")->capture_default_str();
  gc->add_option("--a-p", weights.a_p, "Weight of the position term")->capture_default_str();
  gc->add_option("--a-q", weights.a_q, "Weight of the quality term")->capture_default_str();
  gc->add_option("--a-sin", weights.a_sin, "Weight of the sin term")->capture_default_str();
  gc->add_option("--a-cos", weights.a_cos, "Weight of the cos term")->capture_default_str();
  gc->add_option("--a-w", weights.a_w, "Weight of the width term")->capture_default_str();

  auto* st = app.add_subcommand("selftest", "Run the oracle and property suites");
  double iou_bias = 0;
  st->add_option("--seed", s.seed, "Random seed")->capture_default_str();
  st->add_option("--inject-iou-bias", iou_bias)->group("");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "graspkit: " << e.what() << "\n";
    return kExitUser;
  }

  try {
    if (*imp) {
      if (height == 0) height = format == "jacquard" ? 1024 : 480;
      if (width == 0) width = format == "jacquard" ? 1024 : 640;
      return cmd_import(format, in_dir, height, width, classes_path, first_edge_is_opening, s, out,
                        *log);
    }
    if (*enc) return cmd_encode(scenes_path, s, out, err, *log);
    if (*dec) return cmd_decode(tensor_path, s, out);
    if (*fit) {
      fixture.width = fixture.height;
      return cmd_fit_fixture(fixture, s, out, *log);
    }
    if (*inf) return cmd_infer(dets_path, protos_path, s, out, *log);
    if (*ev) return cmd_eval(pred_path, gt_path, s, out);
    if (*sw) return cmd_sweep(pred_path, gt_path, s, out);
    if (*gc) return cmd_gradcheck(trials, k, step, tol, weights, s, out);
    if (*st) return cmd_selftest(iou_bias, s, out);
  } catch (const UserError& e) {
    err << "graspkit: " << e.what() << "\n";
    return kExitUser;
  } catch (const ParseError& e) {
    err << "graspkit: " << e.what() << "\n";
    return kExitUser;
  } catch (const IoError& e) {
    err << "graspkit: " << e.what() << "\n";
    return kExitUser;
  } catch (const std::invalid_argument& e) {
    err << "graspkit: " << e.what() << "\n";
    return kExitUser;
  } catch (const std::exception& e) {
    err << "graspkit: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace graspkit::cli
