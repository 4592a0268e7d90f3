#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "svmetro/geometry.hpp"

namespace svmetro {

// Template coordinates are millimeters with the origin at the bottom-left of
// each face and y pointing up, so the reference direction is +y.

enum class FaceRole { GroundPlane, ReferenceDirection };

struct Segment {
  Eigen::Vector2d from;
  Eigen::Vector2d to;

  Eigen::Vector2d direction() const { return to - from; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct LinePair {
  Segment first;
  Segment second;
  friend bool operator==(const LinePair&, const LinePair&) = default;
};

struct FaceTemplate {
  std::string face_id;
  FaceRole role = FaceRole::GroundPlane;
  double width_mm = 0.0;
  double height_mm = 0.0;
  std::vector<LinePair> line_pairs;

  friend bool operator==(const FaceTemplate&, const FaceTemplate&) = default;
};

struct ReferenceObject {
  std::string name;
  std::vector<FaceTemplate> faces;
  double reference_height_mm = 0.0;
  Eigen::Vector2d base_anchor = Eigen::Vector2d::Zero();
  Eigen::Vector2d top_anchor = Eigen::Vector2d::Zero();
  // Face carrying the anchors; resolved at load time when omitted.
  std::string anchor_face;

  const FaceTemplate* find_face(const std::string& id) const;
  friend bool operator==(const ReferenceObject&, const ReferenceObject&) = default;
};

// Tolerances enforced by validate().
inline constexpr double kParallelTolRad = 1e-6;
inline constexpr double kAnchorTolMm = 0.1;

ReferenceObject load_reference(const std::filesystem::path& path);
ReferenceObject parse_reference(const std::string& text);
ReferenceObject reference_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ReferenceObject& ref);

//! Checks every invariant; throws ValidationError naming the first violation.
//! Fills in anchor_face when it is empty and unambiguous.
void validate(ReferenceObject& ref);

//! Supporting homogeneous line of a segment.
Homog3 supporting_line(const Segment& s);

//! Each declared pair as its two supporting lines.
std::vector<std::pair<Homog3, Homog3>> template_lines(const FaceTemplate& face);

//! Sine of the angle between two directions.
double direction_sine(const Eigen::Vector2d& a, const Eigen::Vector2d& b);

std::string_view to_string(FaceRole role);

}  // namespace svmetro
