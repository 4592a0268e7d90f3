#include <doctest.h>

#include "support.hpp"
#include "svmetro/error.hpp"
#include "svmetro/reference.hpp"

using namespace svmetro;
using nlohmann::json;
using svmetro::test::box_10cm;

namespace {

json box_json() { return to_json(box_10cm()); }

ErrorCode load_error(const json& j) {
  try {
    parse_reference(j.dump());
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::BadRequest;
}

std::string load_message(const json& j) {
  try {
    parse_reference(j.dump());
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("bundled box_10cm loads") {
  const ReferenceObject ref = box_10cm();
  CHECK(ref.name == "box_10cm");
  CHECK(ref.faces.size() == 2);
  CHECK(ref.reference_height_mm == 100.0);
  CHECK(ref.anchor_face == "front");
  CHECK(ref.find_face("top")->role == FaceRole::GroundPlane);
  CHECK(ref.find_face("front")->role == FaceRole::ReferenceDirection);
}

TEST_CASE("serialize then reparse gives an identical object") {
  const ReferenceObject ref = box_10cm();
  CHECK(parse_reference(to_json(ref).dump()) == ref);
}

TEST_CASE("anchor distance must equal the reference height") {
  json j = box_json();
  j["top_anchor"] = {0.0, 99.0};
  CHECK(load_error(j) == ErrorCode::ValidationError);
  CHECK(load_message(j).find("anchor distance") != std::string::npos);

  j["top_anchor"] = {0.0, 99.95};
  CHECK_NOTHROW(parse_reference(j.dump()));
}

TEST_CASE("a declared pair one degree off parallel is rejected") {
  json j = box_json();
  const double dx = 100.0 * std::tan(M_PI / 180.0);
  j["faces"][0]["line_pairs"][0][1] = {0.0, 100.0, 100.0, 100.0 - dx};
  CHECK(load_error(j) == ErrorCode::ValidationError);
  CHECK(load_message(j).find("not parallel") != std::string::npos);
}

TEST_CASE("structural validation errors") {
  SUBCASE("no reference height") {
    json j = box_json();
    j["reference_height_mm"] = 0.0;
    CHECK(load_error(j) == ErrorCode::ValidationError);
  }
  SUBCASE("segment outside the face") {
    json j = box_json();
    j["faces"][1]["line_pairs"][0][1] = {120.0, 0.0, 120.0, 100.0};
    CHECK(load_error(j) == ErrorCode::ValidationError);
  }
  SUBCASE("ground face whose pairs share a direction") {
    json j = box_json();
    j["faces"][0]["line_pairs"][1] = {{0.0, 20.0, 100.0, 20.0}, {0.0, 80.0, 100.0, 80.0}};
    CHECK(load_error(j) == ErrorCode::ValidationError);
  }
  SUBCASE("reference face without a +y pair") {
    json j = box_json();
    j["faces"][1]["line_pairs"][0] = {{0.0, 0.0, 100.0, 0.0}, {0.0, 100.0, 100.0, 100.0}};
    CHECK(load_error(j) == ErrorCode::ValidationError);
  }
  SUBCASE("missing reference_direction_face") {
    json j = box_json();
    j["faces"].erase(1);
    CHECK(load_error(j) == ErrorCode::ValidationError);
  }
  SUBCASE("anchors on the wrong face") {
    json j = box_json();
    j["anchor_face"] = "top";
    CHECK(load_error(j) == ErrorCode::ValidationError);
  }
  SUBCASE("anchor segment not along +y") {
    json j = box_json();
    j["base_anchor"] = {0.0, 0.0};
    j["top_anchor"] = {100.0, 0.0};
    CHECK(load_error(j) == ErrorCode::ValidationError);
  }
  SUBCASE("duplicate face ids") {
    json j = box_json();
    j["faces"][0]["face_id"] = "front";
    CHECK(load_error(j) == ErrorCode::ValidationError);
  }
  SUBCASE("anchor_face inferred when omitted") {
    json j = box_json();
    j.erase("anchor_face");
    CHECK(parse_reference(j.dump()).anchor_face == "front");
  }
}

TEST_CASE("malformed documents are parse errors") {
  try {
    parse_reference("{ not json");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
  }
  json j = box_json();
  j["faces"][0]["role"] = "ceiling";
  CHECK(load_error(j) == ErrorCode::ParseError);
  j = box_json();
  j.erase("faces");
  CHECK(load_error(j) == ErrorCode::ParseError);
  j = box_json();
  j["faces"][0]["line_pairs"][0][0] = {0.0, 0.0, 100.0};
  CHECK(load_error(j) == ErrorCode::ParseError);
  CHECK_THROWS_AS(load_reference("/nonexistent/ref.json"), Error);
}

TEST_CASE("template_lines") {
  const Homog3 y_axis = supporting_line({{0, 0}, {0, 100}});
  CHECK(projectively_equal(y_axis, {1, 0, 0}));

  FaceTemplate f;
  f.line_pairs.push_back({{{0, 0}, {100, 0}}, {{0, 100}, {100, 100}}});
  const auto lines = template_lines(f);
  REQUIRE(lines.size() == 1);
  CHECK(projectively_equal(cross(lines[0].first, lines[0].second), {1, 0, 0}));

  for (const auto& face : box_10cm().faces)
    for (const auto& [a, b] : template_lines(face)) {
      const Homog3 meet = unit(cross(a, b));
      CHECK(std::abs(meet.c()) < 1e-9);
    }
}
