#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "svmetro/geometry.hpp"
#include "svmetro/metrology.hpp"
#include "svmetro/synthetic.hpp"

namespace svmetro {

//! Minimal SVG builder for diagnostic overlays in image pixel coordinates.
class SvgDocument {
 public:
  SvgDocument(double min_x, double min_y, double width, double height);

  void line(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const std::string& stroke,
            double width = 1.0, bool dashed = false);
  void circle(const Eigen::Vector2d& c, double r, const std::string& stroke,
              const std::string& fill = "none");
  void polygon(const std::vector<Eigen::Vector2d>& pts, const std::string& stroke);
  void text(const Eigen::Vector2d& at, const std::string& s, const std::string& fill,
            double size = 14.0);
  //! Draws the part of homogeneous line @p l inside the view box, if any.
  void infinite_line(const Homog3& l, const std::string& stroke, double width = 1.0,
                     bool dashed = false);

  std::string str() const;

 private:
  double min_x_, min_y_, width_, height_;
  std::ostringstream body_;
};

//! Segment of @p l inside [min, max], or nothing when the line misses it.
std::optional<std::pair<Eigen::Vector2d, Eigen::Vector2d>> clip_line(
    const Homog3& l, const Eigen::Vector2d& min, const Eigen::Vector2d& max);

//! Vanishing line, snap line v x b, the picks and the resulting height.
std::string measurement_svg(const Calibration& cal, const Measurement& m);

//! Projected face outlines, correspondences (outliers in red) and objects.
std::string scene_svg(const SyntheticScene& scene);

}  // namespace svmetro
