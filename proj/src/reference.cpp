#include "svmetro/reference.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "svmetro/error.hpp"

namespace svmetro {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& what) {
  fail(ErrorCode::ValidationError, what);
}

bool inside(const FaceTemplate& f, const Eigen::Vector2d& p) {
  return p.x() >= 0.0 && p.x() <= f.width_mm && p.y() >= 0.0 &&
         p.y() <= f.height_mm;
}

Eigen::Vector2d read_point(const json& j) {
  if (!j.is_array() || j.size() != 2)
    fail(ErrorCode::ParseError, "expected a point [x, y]");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

Segment read_segment(const json& j) {
  if (!j.is_array() || j.size() != 4)
    fail(ErrorCode::ParseError, "expected a segment [x1, y1, x2, y2]");
  return {{j.at(0).get<double>(), j.at(1).get<double>()},
          {j.at(2).get<double>(), j.at(3).get<double>()}};
}

FaceRole read_role(const std::string& s) {
  if (s == "ground_plane_face") return FaceRole::GroundPlane;
  if (s == "reference_direction_face") return FaceRole::ReferenceDirection;
  fail(ErrorCode::ParseError, "unknown face role '" + s + "'");
}

void validate_face(const FaceTemplate& f) {
  const std::string where = "face '" + f.face_id + "': ";
  if (f.face_id.empty()) invalid("face with empty face_id");
  if (!(f.width_mm > 0.0) || !(f.height_mm > 0.0))
    invalid(where + "width_mm and height_mm must be positive");

  int reference_pairs = 0;
  for (std::size_t i = 0; i < f.line_pairs.size(); ++i) {
    const auto& pair = f.line_pairs[i];
    const std::string pw = where + "line pair " + std::to_string(i) + ": ";
    for (const Segment* s : {&pair.first, &pair.second}) {
      if (s->direction().norm() <= kZeroEps) invalid(pw + "zero-length segment");
      if (!inside(f, s->from) || !inside(f, s->to))
        invalid(pw + "segment endpoint outside the face");
    }
    if (direction_sine(pair.first.direction(), pair.second.direction()) > kParallelTolRad)
      invalid(pw + "segments are not parallel");
    if (projectively_equal(supporting_line(pair.first), supporting_line(pair.second), 1e-9))
      invalid(pw + "segments lie on the same line");
    if (direction_sine(pair.first.direction(), Eigen::Vector2d::UnitY()) <= kParallelTolRad)
      ++reference_pairs;
  }

  if (f.role == FaceRole::GroundPlane) {
    bool spans = false;
    for (std::size_t i = 0; i < f.line_pairs.size() && !spans; ++i)
      for (std::size_t j = i + 1; j < f.line_pairs.size() && !spans; ++j)
        spans = direction_sine(f.line_pairs[i].first.direction(),
                               f.line_pairs[j].first.direction()) > kParallelTolRad;
    if (!spans)
      invalid(where + "ground_plane_face needs two line pairs with different directions");
  } else if (reference_pairs == 0) {
    invalid(where + "reference_direction_face needs a line pair along +y");
  }
}

}  // namespace

std::string_view to_string(FaceRole role) {
  return role == FaceRole::GroundPlane ? "ground_plane_face"
                                       : "reference_direction_face";
}

const FaceTemplate* ReferenceObject::find_face(const std::string& id) const {
  for (const auto& f : faces)
    if (f.face_id == id) return &f;
  return nullptr;
}

double direction_sine(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const double n = a.norm() * b.norm();
  if (n <= 0.0) return 0.0;
  return std::abs(a.x() * b.y() - a.y() * b.x()) / n;
}

Homog3 supporting_line(const Segment& s) {
  return cross(Homog3::point(s.from), Homog3::point(s.to));
}

std::vector<std::pair<Homog3, Homog3>> template_lines(const FaceTemplate& face) {
  std::vector<std::pair<Homog3, Homog3>> out;
  out.reserve(face.line_pairs.size());
  for (const auto& p : face.line_pairs)
    out.emplace_back(supporting_line(p.first), supporting_line(p.second));
  return out;
}

void validate(ReferenceObject& ref) {
  if (ref.name.empty()) invalid("reference object has no name");
  if (!(ref.reference_height_mm > 0.0)) invalid("reference_height_mm must be positive");

  bool has_ground = false;
  std::vector<const FaceTemplate*> direction_faces;
  for (std::size_t i = 0; i < ref.faces.size(); ++i) {
    validate_face(ref.faces[i]);
    for (std::size_t j = 0; j < i; ++j)
      if (ref.faces[j].face_id == ref.faces[i].face_id)
        invalid("duplicate face_id '" + ref.faces[i].face_id + "'");
    if (ref.faces[i].role == FaceRole::GroundPlane) has_ground = true;
    else direction_faces.push_back(&ref.faces[i]);
  }
  if (!has_ground) invalid("no ground_plane_face declared");
  if (direction_faces.empty()) invalid("no reference_direction_face declared");

  if (ref.anchor_face.empty()) {
    if (direction_faces.size() > 1)
      invalid("several reference_direction_face entries; anchor_face must name one");
    ref.anchor_face = direction_faces.front()->face_id;
  }
  const FaceTemplate* face = ref.find_face(ref.anchor_face);
  if (face == nullptr) invalid("anchor_face '" + ref.anchor_face + "' does not exist");
  if (face->role != FaceRole::ReferenceDirection)
    invalid("anchor_face '" + ref.anchor_face + "' is not a reference_direction_face");
  if (!inside(*face, ref.base_anchor) || !inside(*face, ref.top_anchor))
    invalid("anchors do not lie on face '" + ref.anchor_face + "'");

  const Eigen::Vector2d span = ref.top_anchor - ref.base_anchor;
  if (std::abs(span.norm() - ref.reference_height_mm) > kAnchorTolMm)
    invalid("anchor distance " + std::to_string(span.norm()) +
            " mm differs from reference_height_mm " +
            std::to_string(ref.reference_height_mm));
  if (span.y() <= 0.0 || direction_sine(span, Eigen::Vector2d::UnitY()) > kParallelTolRad)
    invalid("top_anchor must lie straight above base_anchor (+y)");
}

ReferenceObject reference_from_json(const json& j) {
  ReferenceObject ref;
  try {
    ref.name = j.at("name").get<std::string>();
    ref.reference_height_mm = j.at("reference_height_mm").get<double>();
    ref.base_anchor = read_point(j.at("base_anchor"));
    ref.top_anchor = read_point(j.at("top_anchor"));
    if (j.contains("anchor_face")) ref.anchor_face = j.at("anchor_face").get<std::string>();
    for (const auto& jf : j.at("faces")) {
      FaceTemplate f;
      f.face_id = jf.at("face_id").get<std::string>();
      f.role = read_role(jf.at("role").get<std::string>());
      f.width_mm = jf.at("width_mm").get<double>();
      f.height_mm = jf.at("height_mm").get<double>();
      for (const auto& jp : jf.at("line_pairs")) {
        if (!jp.is_array() || jp.size() != 2)
          fail(ErrorCode::ParseError, "a line pair must hold exactly two segments");
        f.line_pairs.push_back({read_segment(jp.at(0)), read_segment(jp.at(1))});
      }
      ref.faces.push_back(std::move(f));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("reference spec: ") + e.what());
  }
  validate(ref);
  return ref;
}

ReferenceObject parse_reference(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("reference spec: ") + e.what());
  }
  return reference_from_json(j);
}

ReferenceObject load_reference(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ParseError, "cannot open reference spec " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_reference(ss.str());
}

json to_json(const ReferenceObject& ref) {
  auto seg = [](const Segment& s) {
    return json::array({s.from.x(), s.from.y(), s.to.x(), s.to.y()});
  };
  json faces = json::array();
  for (const auto& f : ref.faces) {
    json pairs = json::array();
    for (const auto& p : f.line_pairs) pairs.push_back(json::array({seg(p.first), seg(p.second)}));
    faces.push_back({{"face_id", f.face_id},
                     {"role", std::string(to_string(f.role))},
                     {"width_mm", f.width_mm},
                     {"height_mm", f.height_mm},
                     {"line_pairs", pairs}});
  }
  return {{"name", ref.name},
          {"reference_height_mm", ref.reference_height_mm},
          {"base_anchor", {ref.base_anchor.x(), ref.base_anchor.y()}},
          {"top_anchor", {ref.top_anchor.x(), ref.top_anchor.y()}},
          {"anchor_face", ref.anchor_face},
          {"faces", faces}};
}

}  // namespace svmetro
