#include <doctest.h>

#include <cstring>
#include <filesystem>

#include "support.hpp"
#include "svmetro/error.hpp"
#include "svmetro/io.hpp"

using namespace svmetro;
using nlohmann::json;
using svmetro::test::box_10cm;

namespace {

ErrorCode csv_error(const std::string& text) {
  try {
    parse_correspondences_csv(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::BadRequest;
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("correspondence CSV: header, comments, blank lines") {
  const auto corrs = parse_correspondences_csv(
      "# fixture\n"
      "tx,ty,ix,iy\n"
      "0,0,100.5,200.25   # corner\n"
      "\n"
      " 100 , 0 , 300 , 210\n");
  REQUIRE(corrs.size() == 2);
  CHECK(corrs[0].image == Eigen::Vector2d(100.5, 200.25));
  CHECK(corrs[1].templ == Eigen::Vector2d(100, 0));
}

TEST_CASE("correspondence CSV: errors") {
  CHECK(csv_error("") == ErrorCode::ParseError);
  CHECK(csv_error("x,y,u,v\n1,2,3,4\n") == ErrorCode::ParseError);
  CHECK(csv_error("tx,ty,ix,iy\n1,2,3\n") == ErrorCode::ParseError);
  CHECK(csv_error("tx,ty,ix,iy\n1,2,3,4,5\n") == ErrorCode::ParseError);
  CHECK(csv_error("tx,ty,ix,iy\n1,2,abc,4\n") == ErrorCode::ParseError);
  CHECK(csv_error("tx,ty,ix,iy\n1,2,nan,4\n") == ErrorCode::ParseError);
  CHECK(csv_error("tx,ty,ix,iy\n1,2,3,\n") == ErrorCode::ParseError);
}

TEST_CASE("correspondence CSV round-trips every bit") {
  test::Rng rng(4);
  std::vector<Correspondence> corrs;
  for (int i = 0; i < 100; ++i)
    corrs.push_back({{rng.uniform(0, 100), rng.uniform(0, 100)},
                     {rng.uniform(-1e4, 1e4), rng.uniform(-1e4, 1e4)}});
  const auto back = parse_correspondences_csv(format_correspondences_csv(corrs));
  REQUIRE(back.size() == corrs.size());
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    CHECK(bit_equal(back[i].image.x(), corrs[i].image.x()));
    CHECK(bit_equal(back[i].templ.y(), corrs[i].templ.y()));
  }
}

TEST_CASE("calibration JSON round-trips every bit and re-serializes stably") {
  SceneConfig cfg;
  cfg.reference = box_10cm();
  cfg.seed = 2;
  cfg.noise_sigma_px = 0.7;
  cfg.object_heights_mm = {120};
  const SyntheticScene s = generate(cfg);
  const Calibration cal = calibrate(s.reference, s.correspondence_map(), {});
  const std::string text = dump(to_json(cal));
  const Calibration back = calibration_from_json(json::parse(text));
  for (int i = 0; i < 3; ++i) {
    CHECK(bit_equal(back.l[i], cal.l[i]));
    CHECK(bit_equal(back.v[i], cal.v[i]));
    CHECK(bit_equal(back.b_r[i], cal.b_r[i]));
    CHECK(bit_equal(back.t_r[i], cal.t_r[i]));
  }
  CHECK(bit_equal(back.alpha, cal.alpha));
  CHECK(dump(to_json(back)) == text);
  CHECK(back.faces.size() == 2);

  const auto& o = s.objects.front();
  CHECK(bit_equal(measure_height(back, o.b_x, o.t_x).height_mm,
                  measure_height(cal, o.b_x, o.t_x).height_mm));
}

TEST_CASE("calibration JSON: malformed documents") {
  CHECK_THROWS_AS(calibration_from_json(json::object()), Error);
  json j = {{"l", {0, 0, 1}}, {"v", {0, 1, 0}}, {"b_r", {0, 0, 1}}, {"t_r", {0, 5, 1}},
            {"alpha", -1.0}, {"reference_height_mm", 5.0}};
  CHECK_THROWS_AS(calibration_from_json(j), Error);
  j["alpha"] = 1.0;
  CHECK_NOTHROW(calibration_from_json(j));
}

TEST_CASE("ransac config JSON keeps defaults for missing keys") {
  const RansacConfig cfg = ransac_config_from_json(json{{"seed", 42}, {"inlier_threshold", 2.0}});
  CHECK(cfg.seed == 42);
  CHECK(cfg.inlier_threshold == 2.0);
  CHECK(cfg.max_iterations == 2000);
  CHECK_THROWS_AS(ransac_config_from_json(json{{"confidence", 2.0}}), Error);
  CHECK_THROWS_AS(ransac_config_from_json(json{{"seed", "x"}}), Error);
}

TEST_CASE("fixture directory is reproducible") {
  const auto root = std::filesystem::temp_directory_path() / "svmetro_io_fixture";
  std::filesystem::remove_all(root);
  SceneConfig cfg;
  cfg.reference = box_10cm();
  cfg.seed = 7;
  cfg.object_heights_mm = {50, 100, 170};
  write_fixture(generate(cfg), root / "a", true);
  write_fixture(generate(cfg), root / "b", true);
  for (const char* name : {"reference.json", "top.csv", "front.csv", "truth.json", "scene.svg"})
    CHECK(read_file(root / "a" / name) == read_file(root / "b" / name));
  CHECK(load_reference(root / "a" / "reference.json") == box_10cm());
  CHECK(load_correspondences_csv(root / "a" / "top.csv").size() == 25);
  std::filesystem::remove_all(root);
}

TEST_CASE("atomic write leaves no temp files behind") {
  const auto dir = std::filesystem::temp_directory_path() / "svmetro_io_atomic";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "x.json", "{}\n");
  write_file_atomic(dir / "x.json", "{\"a\": 1}\n");
  CHECK(read_file(dir / "x.json") == "{\"a\": 1}\n");
  CHECK(std::distance(std::filesystem::directory_iterator(dir), {}) == 1);
  std::filesystem::remove_all(dir);
}
