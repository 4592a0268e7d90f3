#include "svmetro/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

namespace svmetro {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

SvgDocument::SvgDocument(double min_x, double min_y, double width, double height)
    : min_x_(min_x), min_y_(min_y), width_(width), height_(height) {}

void SvgDocument::line(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                       const std::string& stroke, double width, bool dashed) {
  body_ << "  <line x1=\"" << fmt(a.x()) << "\" y1=\"" << fmt(a.y()) << "\" x2=\""
        << fmt(b.x()) << "\" y2=\"" << fmt(b.y()) << "\" stroke=\"" << stroke
        << "\" stroke-width=\"" << fmt(width) << "\"";
  if (dashed) body_ << " stroke-dasharray=\"6,4\"";
  body_ << "/>\n";
}

void SvgDocument::circle(const Eigen::Vector2d& c, double r, const std::string& stroke,
                         const std::string& fill) {
  body_ << "  <circle cx=\"" << fmt(c.x()) << "\" cy=\"" << fmt(c.y()) << "\" r=\"" << fmt(r)
        << "\" stroke=\"" << stroke << "\" fill=\"" << fill << "\"/>\n";
}

void SvgDocument::polygon(const std::vector<Eigen::Vector2d>& pts, const std::string& stroke) {
  body_ << "  <polygon points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i)
    body_ << (i ? " " : "") << fmt(pts[i].x()) << "," << fmt(pts[i].y());
  body_ << "\" stroke=\"" << stroke << "\" fill=\"none\"/>\n";
}

void SvgDocument::text(const Eigen::Vector2d& at, const std::string& s,
                       const std::string& fill, double size) {
  body_ << "  <text x=\"" << fmt(at.x()) << "\" y=\"" << fmt(at.y()) << "\" fill=\"" << fill
        << "\" font-family=\"sans-serif\" font-size=\"" << fmt(size) << "\">" << escape(s)
        << "</text>\n";
}

void SvgDocument::infinite_line(const Homog3& l, const std::string& stroke, double width,
                                bool dashed) {
  const auto seg = clip_line(l, {min_x_, min_y_}, {min_x_ + width_, min_y_ + height_});
  if (seg) line(seg->first, seg->second, stroke, width, dashed);
}

std::string SvgDocument::str() const {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << fmt(min_x_) << " "
      << fmt(min_y_) << " " << fmt(width_) << " " << fmt(height_) << "\" width=\""
      << fmt(width_) << "\" height=\"" << fmt(height_) << "\">\n"
      << body_.str() << "</svg>\n";
  return out.str();
}

std::optional<std::pair<Eigen::Vector2d, Eigen::Vector2d>> clip_line(
    const Homog3& l, const Eigen::Vector2d& min, const Eigen::Vector2d& max) {
  const double a = l.a(), b = l.b(), c = l.c();
  if (std::hypot(a, b) <= kZeroEps) return std::nullopt;
  std::vector<Eigen::Vector2d> hits;
  auto keep = [&](const Eigen::Vector2d& p) {
    const double slack = 1e-9 * (max - min).norm();
    if (p.x() >= min.x() - slack && p.x() <= max.x() + slack && p.y() >= min.y() - slack &&
        p.y() <= max.y() + slack)
      hits.push_back(p);
  };
  if (std::abs(b) > kZeroEps)
    for (double x : {min.x(), max.x()}) keep({x, -(a * x + c) / b});
  if (std::abs(a) > kZeroEps)
    for (double y : {min.y(), max.y()}) keep({-(b * y + c) / a, y});
  if (hits.size() < 2) return std::nullopt;
  auto [lo, hi] = std::minmax_element(hits.begin(), hits.end(), [&](const auto& p, const auto& q) {
    return -b * p.x() + a * p.y() < -b * q.x() + a * q.y();
  });
  return std::make_pair(*lo, *hi);
}

std::string measurement_svg(const Calibration& cal, const Measurement& m) {
  std::vector<Eigen::Vector2d> pts{m.b_x.euclidean(), m.t_x_raw.euclidean(),
                                   m.t_x_aligned.euclidean(), cal.b_r.euclidean(),
                                   cal.t_r.euclidean()};
  Eigen::Vector2d lo = pts.front(), hi = pts.front();
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double margin = std::max(40.0, 0.5 * (hi - lo).maxCoeff());
  lo.array() -= margin;
  hi.array() += margin;

  SvgDocument svg(lo.x(), lo.y(), hi.x() - lo.x(), hi.y() - lo.y());
  svg.infinite_line(cal.l, "#1f77b4", 2.0);
  svg.infinite_line(raw_cross(cal.v, m.b_x), "#7f7f7f", 1.0, true);
  svg.line(cal.b_r.euclidean(), cal.t_r.euclidean(), "#2ca02c", 2.0);
  svg.line(m.b_x.euclidean(), m.t_x_aligned.euclidean(), "#d62728", 2.0);
  if (m.alignment_shift_px > 0.0)
    svg.line(m.t_x_raw.euclidean(), m.t_x_aligned.euclidean(), "#ff7f0e", 1.0, true);
  svg.circle(m.b_x.euclidean(), 4.0, "#d62728", "#d62728");
  svg.circle(m.t_x_raw.euclidean(), 4.0, "#ff7f0e");
  svg.circle(m.t_x_aligned.euclidean(), 4.0, "#d62728", "#d62728");

  char label[64];
  std::snprintf(label, sizeof label, "%.3f mm (%.2f cm)", m.height_mm, m.height_mm / 10.0);
  svg.text(m.t_x_aligned.euclidean() + Eigen::Vector2d(8.0, -8.0), label, "#d62728");
  return svg.str();
}

std::string scene_svg(const SyntheticScene& scene) {
  SvgDocument svg(0.0, 0.0, scene.image_width, scene.image_height);
  svg.infinite_line(scene.true_l, "#1f77b4", 2.0);
  for (const auto& f : scene.faces) {
    const FaceTemplate* t = scene.reference.find_face(f.face_id);
    std::vector<Eigen::Vector2d> outline;
    for (const Eigen::Vector2d& uv : {Eigen::Vector2d(0, 0), Eigen::Vector2d(t->width_mm, 0),
                                     Eigen::Vector2d(t->width_mm, t->height_mm),
                                     Eigen::Vector2d(0, t->height_mm)})
      outline.push_back(project(scene.camera, f.pose.at(uv)).euclidean());
    svg.polygon(outline, "#2ca02c");
    for (std::size_t i = 0; i < f.correspondences.size(); ++i)
      svg.circle(f.correspondences[i].image, 2.5, f.is_outlier[i] ? "#d62728" : "#2ca02c");
  }
  for (const auto& o : scene.objects) {
    svg.line(o.b_x.euclidean(), o.t_x.euclidean(), "#9467bd", 2.0);
    char label[32];
    std::snprintf(label, sizeof label, "%.1f mm", o.height_mm);
    svg.text(o.t_x.euclidean() + Eigen::Vector2d(6.0, 0.0), label, "#9467bd", 12.0);
  }
  return svg.str();
}

}  // namespace svmetro
