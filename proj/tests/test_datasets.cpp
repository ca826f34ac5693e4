#include "graspkit/datasets.hpp"
#include "graspkit/random.hpp"
#include "support.hpp"

#include <doctest.h>

#include <bit>
#include <cstring>
#include <limits>
#include <numbers>
#include <sstream>

using namespace graspkit;
using graspkit::test::kDeg;

namespace {

const std::map<std::string, int> kClasses{{"banana", 7}, {"bowl", 2}};

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

bool contains(const std::string& s, const std::string& needle) {
  return s.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("import_jacquard") {
  SUBCASE("field mapping") {
    const auto s = import_jacquard("510.0;360.0;-60.0;119.0;40.0\n", "j0", 1024, 1024);
    REQUIRE(s.objects.size() == 1);
    const auto& o = s.objects[0];
    CHECK(o.class_id == 0);
    CHECK(o.class_name == "object");
    REQUIRE(o.grasps.size() == 1);
    const auto& g = o.grasps[0];
    CHECK(g.x == 510);
    CHECK(g.y == 360);
    CHECK(g.theta == doctest::Approx(-60 * kDeg));
    CHECK(g.width == 119);
    CHECK(g.height == 40);
    const Box b = bounding_box(rect_to_polygon(g));
    CHECK(o.box == b);
  }
  SUBCASE("angles are normalized") {
    const auto s = import_jacquard("10;10;120;20;8\n\n  \n10;12;-95;20;8\n", "j1", 50, 50);
    const auto& gs = s.objects[0].grasps;
    REQUIRE(gs.size() == 2);
    CHECK(gs[0].theta == doctest::Approx(-60 * kDeg));
    CHECK(gs[1].theta == doctest::Approx(85 * kDeg));
    // Box is the union of both polygons, clamped to the image.
    CHECK(s.objects[0].box.x_min >= 0);
  }
  SUBCASE("errors") {
    CHECK(contains(error_of([] { import_jacquard("", "e", 100, 100); }), "no grasps"));
    const auto four = error_of([] { import_jacquard("1;2;3;4;5\n1;2;3;4\n", "e", 100, 100); });
    CHECK(contains(four, "line 2"));
    const auto nan = error_of([] { import_jacquard("1;2;x;4;5\n", "e", 100, 100); });
    CHECK(contains(nan, "line 1"));
    CHECK(contains(nan, "theta"));
    CHECK_THROWS_AS(import_jacquard("1;2;3;4\n", "e", 100, 100), ParseError);
    // Out-of-bounds grasps are reported, never clamped.
    const auto oob = error_of([] { import_jacquard("150;20;0;10;5\n", "e", 100, 100); });
    CHECK(contains(oob, "grasp"));
  }
  SUBCASE("pure") {
    const std::string text = "30;40;12.5;20;9\n50;45;-3;30;10\n";
    CHECK(import_jacquard(text, "p", 100, 100) == import_jacquard(text, "p", 100, 100));
  }
}

TEST_CASE("import_ocid") {
  SUBCASE("axis-aligned banana") {
    const auto s = import_ocid("banana\n8 11\n8 9\n12 9\n12 11\n", kClasses, "o0", 480, 640);
    REQUIRE(s.objects.size() == 1);
    const auto& o = s.objects[0];
    CHECK(o.class_id == 7);
    CHECK(o.class_name == "banana");
    REQUIRE(o.grasps.size() == 1);
    const auto& g = o.grasps[0];
    CHECK(g.x == doctest::Approx(10));
    CHECK(g.y == doctest::Approx(10));
    CHECK(g.theta == doctest::Approx(0));
    CHECK(g.width == doctest::Approx(4));
    CHECK(g.height == doctest::Approx(2));
    CHECK(g.class_id == 7);
  }
  SUBCASE("grouping by class") {
    const std::string text =
        "banana\n8 11\n8 9\n12 9\n12 11\n"
        "bowl\n30 32\n30 28\n40 28\n40 32\n"
        "banana\n18 21\n18 19\n22 19\n22 21\n20 25\n20 23\n24 23\n24 25\n";
    const auto s = import_ocid(text, kClasses, "o1", 480, 640);
    REQUIRE(s.objects.size() == 2);
    CHECK(s.objects[0].class_name == "banana");
    CHECK(s.objects[0].grasps.size() == 3);
    CHECK(s.objects[1].class_id == 2);
    CHECK(s.objects[1].grasps.size() == 1);
  }
  SUBCASE("flipped edge convention") {
    OcidOptions opts;
    opts.first_edge_is_opening = true;
    const auto s = import_ocid("banana\n8 11\n8 9\n12 9\n12 11\n", kClasses, "o2", 480, 640, {}, opts);
    const auto& g = s.objects[0].grasps[0];
    CHECK(g.width == doctest::Approx(2));
    CHECK(g.height == doctest::Approx(4));
    CHECK(std::abs(g.theta) == doctest::Approx(std::numbers::pi / 2));
  }
  SUBCASE("errors") {
    const auto five = error_of(
        [] { import_ocid("banana\n8 11\n8 9\n12 9\n12 11\n13 13\n", kClasses, "e", 480, 640); });
    CHECK(contains(five, "multiple of 4"));
    const auto flat = error_of(
        [] { import_ocid("banana\n8 10\n9 10\n10 10\n11 10\n", kClasses, "e", 480, 640); });
    CHECK(contains(flat, "degenerate"));
    const auto unknown =
        error_of([] { import_ocid("apple\n8 11\n8 9\n12 9\n12 11\n", kClasses, "e", 480, 640); });
    CHECK(contains(unknown, "unknown class"));
    CHECK(contains(unknown, "line 1"));
    const auto bowtie = error_of(
        [] { import_ocid("bowl\n0 0\n10 0\n3 3\n0 10\n", kClasses, "e", 480, 640); });
    CHECK(contains(bowtie, "convex"));
    const auto token = error_of(
        [] { import_ocid("bowl\n1 2 3\n", kClasses, "e", 480, 640); });
    CHECK(contains(token, "line 2"));
  }
}

TEST_CASE("corner round trip") {
  FixtureRng rng(31);
  for (int i = 0; i < 200; ++i) {
    const GraspRect r{rng.uniform(20, 200), rng.uniform(20, 200), rng.angle(), rng.uniform(2, 80),
                      rng.uniform(2, 40)};
    const auto poly = rect_to_polygon(r);
    const std::array<Point, 4> quad{poly[0], poly[1], poly[2], poly[3]};
    const GraspRect back = rect_from_corners(quad, true);
    const auto again = rect_to_polygon(back);
    for (int v = 0; v < 4; ++v) CHECK((again[v] - poly[v]).norm() < 1e-6);
  }
}

TEST_CASE("tensor byte format") {
  SUBCASE("2 x 2 round trip") {
    const Tensor t{{2, 2}, {1.5f, -0.0f, std::numeric_limits<float>::denorm_min(), 3e38f}};
    const auto bytes = write_tensor(t);
    const Tensor back = read_tensor(bytes);
    REQUIRE(back.dims == t.dims);
    CHECK(std::memcmp(back.data.data(), t.data.data(), 16) == 0);
    CHECK(write_tensor(back) == bytes);
  }
  SUBCASE("header layout") {
    const Tensor t{{3, 2, 2}, std::vector<float>(12, 1.0f)};
    const auto bytes = write_tensor(t);
    CHECK(bytes.size() == 68);
    CHECK(std::memcmp(bytes.data(), "GKT1", 4) == 0);
    CHECK(bytes[4] == 3);
    CHECK(bytes[5] == 0);
    CHECK(bytes[8] == 3);
    CHECK(bytes[12] == 2);
    // 1.0f little-endian
    CHECK(bytes[20] == 0x00);
    CHECK(bytes[22] == 0x80);
    CHECK(bytes[23] == 0x3f);
  }
  SUBCASE("errors") {
    auto bytes = write_tensor(Tensor{{2, 2}, {1, 2, 3, 4}});
    auto bad = bytes;
    bad[3] = '2';
    CHECK(contains(error_of([&] { read_tensor(bad); }), "bad magic"));
    auto short_payload = bytes;
    short_payload.pop_back();
    CHECK(contains(error_of([&] { read_tensor(short_payload); }), "truncated payload"));
    auto trailing = bytes;
    trailing.push_back(0);
    CHECK(contains(error_of([&] { read_tensor(trailing); }), "trailing"));
    CHECK(contains(error_of([&] { read_tensor({'G', 'K'}); }), "truncated header"));
    const std::vector<std::uint8_t> huge{'G', 'K', 'T', '1', 2, 0, 0, 0, 0xff, 0xff, 0xff, 0xff,
                                         0xff, 0xff, 0xff, 0xff};
    CHECK(contains(error_of([&] { read_tensor(huge); }), "overflow"));
    const std::vector<std::uint8_t> rank4{'G', 'K', 'T', '1', 4, 0, 0, 0};
    CHECK_THROWS_AS(read_tensor(rank4), ParseError);
    CHECK_THROWS_AS(write_tensor(Tensor{{4}, {1, 2, 3, 4}}), std::invalid_argument);
    CHECK_THROWS_AS(write_tensor(Tensor{{2, 2}, {1, 2, 3}}), std::invalid_argument);
  }
}

TEST_CASE("tensor conversions") {
  FixtureRng rng(4);
  PrototypeStack p(3, 5, PrototypeStack::Matrix(round_to_float(rng.gaussian(15, 4))));
  const Tensor t = to_tensor(p);
  CHECK(t.dims == std::vector<std::uint32_t>{3, 5, 4});
  // h x w x k, last dimension fastest.
  CHECK(t.data[(1 * 5 + 2) * 4 + 3] == static_cast<float>(p.prototype(3)(1, 2)));
  const PrototypeStack back = to_prototypes(t);
  CHECK(back.h == 3);
  CHECK(back.w == 5);
  CHECK(back.data == p.data);

  const Eigen::MatrixXd m = round_to_float(rng.gaussian(5, 7));
  const Eigen::MatrixXd m_back = to_matrix(to_tensor(m));
  CHECK(m_back.cwiseEqual(m).all());
  CHECK_THROWS_AS(to_prototypes(to_tensor(m)), DimensionMismatch);

  const std::vector<GraspRect> g{{4, 4, 0.3, 6, 3}};
  const auto maps = encode_grasps(g, 8, 9, {});
  const Tensor mt = to_tensor(maps);
  CHECK(mt.dims == std::vector<std::uint32_t>{5, 8, 9});
  const GraspMaps mb = to_grasp_maps(mt);
  CHECK((mb.position == maps.position).all());
  CHECK(((mb.quality - maps.quality).abs() < 1e-7).all());
}

TEST_CASE("tensor files") {
  test::TempDir dir("tensors");
  const Tensor t{{2, 3}, {1, 2, 3, 4, 5, 6}};
  save_tensor(dir / "t.gkt", t);
  CHECK(load_tensor(dir / "t.gkt") == t);
  CHECK_THROWS_AS(load_tensor(dir / "missing.gkt"), IoError);
  test::write_file(dir / "bad.gkt", "GKT2xxxx");
  CHECK(contains(error_of([&] { load_tensor(dir / "bad.gkt"); }), "bad magic"));
  CHECK(contains(error_of([&] { load_tensor(dir / "bad.gkt"); }), "bad.gkt"));
}

TEST_CASE("scene JSON lines") {
  SUBCASE("empty input") {
    std::istringstream in("");
    CHECK(read_scenes(in).empty());
  }
  SUBCASE("round trip") {
    FixtureRng rng(8);
    std::vector<Scene> scenes;
    for (int i = 0; i < 10; ++i) scenes.push_back(rng.scene("s" + std::to_string(i)));
    std::stringstream io;
    write_scenes(io, scenes);
    const auto back = read_scenes(io);
    CHECK(back == scenes);
  }
  SUBCASE("schema errors name line and field") {
    std::istringstream missing(
        "{\"scene_id\":\"a\",\"image_size\":[4,4],\"objects\":[]}\n"
        "{\"scene_id\":\"b\",\"image_size\":[4,4]}\n");
    const auto e = error_of([&] { read_scenes(missing); });
    CHECK(contains(e, "line 2"));
    CHECK(contains(e, "objects"));

    std::istringstream nested(
        "{\"scene_id\":\"a\",\"image_size\":[40,40],\"objects\":[{\"class_id\":1,"
        "\"class_name\":\"c\",\"box\":[0,0,4,4],\"grasps\":[{\"x\":1,\"y\":1,\"theta\":0,"
        "\"width\":\"wide\",\"height\":1,\"quality\":1}]}]}\n");
    const auto n = error_of([&] { read_scenes(nested); });
    CHECK(contains(n, "line 1"));
    CHECK(contains(n, "width"));

    std::istringstream garbage("{not json\n");
    CHECK_THROWS_AS(read_scenes(garbage), ParseError);
  }
  SUBCASE("files") {
    test::TempDir dir("scenes");
    FixtureRng rng(9);
    const std::vector<Scene> scenes{rng.scene("x"), rng.scene("y")};
    save_scenes(dir / "s.jsonl", scenes);
    CHECK(load_scenes(dir / "s.jsonl") == scenes);
    CHECK_THROWS_AS(load_scenes(dir / "nope.jsonl"), IoError);
  }
}
