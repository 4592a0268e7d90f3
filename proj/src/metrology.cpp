#include "svmetro/metrology.hpp"

#include <cmath>

#include "svmetro/error.hpp"

namespace svmetro {

namespace {

struct ProjectiveRatio {
  double value;         // |b x t| / (|l.b| |v x t|)
  double horizon;       // |l.b|
};

Homog3 finite_point(const Homog3& p, const char* what) {
  if (p.norm() <= kZeroEps) fail(ErrorCode::ZeroVector, std::string(what) + " is a zero vector");
  if (p.is_ideal())
    fail(ErrorCode::DegenerateGeometry, std::string(what) + " is a point at infinity");
  return normalize(p);
}

// Shared by the metric factor and the height: both must see identically
// normalized entities for their composition to be scale-free.
ProjectiveRatio projective_ratio(const Homog3& l, const Homog3& v, const Homog3& b,
                                 const Homog3& t) {
  const Homog3 lu = unit(l);
  const Homog3 vu = unit(v);
  const double horizon = std::abs(lu.dot(b));
  if (horizon < kHorizonHardLimit)
    fail(ErrorCode::DegenerateGeometry, "base point lies on the vanishing line");
  if (projectively_equal(vu, t))
    fail(ErrorCode::DegenerateGeometry, "top point coincides with the vanishing point");
  const double num = b.vec().cross(t.vec()).norm();
  const double den = horizon * vu.vec().cross(t.vec()).norm();
  return {num / den, horizon};
}

// Pick the pair whose imaged lines meet at the widest angle.
std::size_t best_conditioned(const std::vector<std::pair<Homog3, Homog3>>& lines) {
  std::size_t best = 0;
  double best_sine = -1.0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& [a, b] = lines[i];
    const double s = direction_sine({a.a(), a.b()}, {b.a(), b.b()});
    if (s > best_sine) {
      best_sine = s;
      best = i;
    }
  }
  return best;
}

}  // namespace

Homog3 vanishing_point_of_pair(const Homog3& l1, const Homog3& l2) {
  if (projectively_equal(l1, l2))
    fail(ErrorCode::DegeneratePair, "the two lines coincide");
  return normalize(raw_cross(l1, l2));
}

Homog3 vanishing_line_of_plane(const Homog3& vp1, const Homog3& vp2) {
  if (projectively_equal(vp1, vp2))
    fail(ErrorCode::DegeneratePair, "the two vanishing points coincide");
  return normalize(raw_cross(vp1, vp2));
}

Homog3 align_input(const Homog3& v, const Homog3& b_x, const Homog3& t_x_raw) {
  const Homog3 b = finite_point(b_x, "base point");
  if (projectively_equal(v, b))
    fail(ErrorCode::DegenerateDirection, "base point coincides with the vanishing point");
  return project_onto_line(t_x_raw, raw_cross(v, b));
}

double metric_factor(const Homog3& l, const Homog3& v, const Homog3& b_r,
                     const Homog3& t_r, double reference_height_mm) {
  if (!(reference_height_mm > 0.0))
    fail(ErrorCode::DegenerateGeometry, "reference height must be positive");
  const Homog3 b = finite_point(b_r, "reference base");
  const Homog3 t_raw = finite_point(t_r, "reference top");
  if (projectively_equal(b, t_raw))
    fail(ErrorCode::DegenerateGeometry, "reference base and top coincide");
  const Homog3 t = normalize(align_input(v, b, t_raw));
  if (projectively_equal(b, t))
    fail(ErrorCode::DegenerateGeometry, "reference segment collapses onto its base after alignment");
  return projective_ratio(l, v, b, t).value / reference_height_mm;
}

Measurement measure_height(const Calibration& cal, const Homog3& b_x,
                           const Homog3& t_x_raw) {
  Measurement m;
  m.b_x = finite_point(b_x, "base point");
  if (t_x_raw.is_ideal()) fail(ErrorCode::NotFinite, "top point is at infinity");
  m.t_x_raw = normalize(t_x_raw);
  if (projectively_equal(m.b_x, m.t_x_raw))
    fail(ErrorCode::ZeroLength, "base and top picks coincide");

  const double horizon = std::abs(unit(cal.l).dot(m.b_x));
  if (horizon < kHorizonHardLimit)
    fail(ErrorCode::DegenerateGeometry, "base point lies on the vanishing line");

  m.t_x_aligned = normalize(align_input(cal.v, m.b_x, m.t_x_raw));
  if (projectively_equal(m.b_x, m.t_x_aligned))
    fail(ErrorCode::ZeroLength, "top pick projects onto the base point");
  m.alignment_shift_px = (m.t_x_raw.euclidean() - m.t_x_aligned.euclidean()).norm();

  const ProjectiveRatio r = projective_ratio(cal.l, cal.v, m.b_x, m.t_x_aligned);
  m.height_mm = r.value / cal.alpha;
  m.horizon_proximity = r.horizon;
  m.low_confidence = r.horizon < kHorizonLowConfidence;
  return m;
}

Calibration calibrate_from_homographies(
    const ReferenceObject& ref, const std::map<std::string, Homography>& homographies) {
  const FaceTemplate* ground = nullptr;
  for (const auto& f : ref.faces)
    if (f.role == FaceRole::GroundPlane && homographies.count(f.face_id)) {
      ground = &f;
      break;
    }
  if (ground == nullptr)
    fail(ErrorCode::MissingFace, "no correspondences for any ground_plane_face");
  if (!homographies.count(ref.anchor_face))
    fail(ErrorCode::MissingFace,
         "no correspondences for reference face '" + ref.anchor_face + "'");

  Calibration cal;
  cal.reference_height_mm = ref.reference_height_mm;

  // Ground plane: the two declared pairs with the most distinct template
  // directions give two vanishing points.
  {
    const auto& pairs = ground->line_pairs;
    std::size_t i_best = 0, j_best = 1;
    double best = -1.0;
    for (std::size_t i = 0; i < pairs.size(); ++i)
      for (std::size_t j = i + 1; j < pairs.size(); ++j) {
        const double s = direction_sine(pairs[i].first.direction(), pairs[j].first.direction());
        if (s > best) {
          best = s;
          i_best = i;
          j_best = j;
        }
      }
    const Homography& h = homographies.at(ground->face_id);
    const auto lines = template_lines(*ground);
    const Homog3 vp1 = vanishing_point_of_pair(map_line(h, lines[i_best].first),
                                               map_line(h, lines[i_best].second));
    const Homog3 vp2 = vanishing_point_of_pair(map_line(h, lines[j_best].first),
                                               map_line(h, lines[j_best].second));
    cal.l = vanishing_line_of_plane(vp1, vp2);
  }

  // Reference direction: every +y pair on every measured reference face.
  {
    std::vector<std::pair<Homog3, Homog3>> imaged;
    for (const auto& f : ref.faces) {
      if (f.role != FaceRole::ReferenceDirection || !homographies.count(f.face_id)) continue;
      const Homography& h = homographies.at(f.face_id);
      for (const auto& p : f.line_pairs) {
        if (direction_sine(p.first.direction(), Eigen::Vector2d::UnitY()) > kParallelTolRad)
          continue;
        imaged.emplace_back(map_line(h, supporting_line(p.first)),
                            map_line(h, supporting_line(p.second)));
      }
    }
    const std::size_t chosen = best_conditioned(imaged);
    cal.v = vanishing_point_of_pair(imaged[chosen].first, imaged[chosen].second);
    const Homog3 vu = unit(cal.v);
    for (std::size_t i = 0; i < imaged.size(); ++i) {
      if (i == chosen) continue;
      for (const Homog3& line : {imaged[i].first, imaged[i].second})
        cal.v_consistency = std::max(cal.v_consistency, std::abs(unit(line).dot(vu)));
    }
  }

  const Homography& h = homographies.at(ref.anchor_face);
  const Homog3 base = apply_point(h, Homog3::point(ref.base_anchor));
  const Homog3 top = apply_point(h, Homog3::point(ref.top_anchor));
  if (base.is_ideal() || top.is_ideal())
    fail(ErrorCode::DegenerateGeometry, "reference anchors map to infinity");
  cal.b_r = normalize(base);
  const Homog3 top_raw = normalize(top);
  if (projectively_equal(cal.v, top_raw))
    fail(ErrorCode::DegenerateGeometry, "reference top coincides with the vanishing point");

  cal.alpha = metric_factor(cal.l, cal.v, cal.b_r, top_raw, ref.reference_height_mm);
  cal.t_r = normalize(align_input(cal.v, cal.b_r, top_raw));
  cal.t_r_alignment_shift_px = (top_raw.euclidean() - cal.t_r.euclidean()).norm();
  return cal;
}

Calibration calibrate(const ReferenceObject& ref,
                      const CorrespondenceMap& corrs_per_face,
                      const RansacConfig& cfg) {
  for (const auto& [face_id, corrs] : corrs_per_face)
    if (ref.find_face(face_id) == nullptr)
      fail(ErrorCode::ValidationError,
           "correspondences given for unknown face '" + face_id + "'");

  std::map<std::string, Homography> homographies;
  std::vector<FaceDiagnostics> diagnostics;
  std::uint64_t face_index = 0;
  for (const auto& f : ref.faces) {
    ++face_index;
    auto it = corrs_per_face.find(f.face_id);
    if (it == corrs_per_face.end() || it->second.empty()) continue;
    RansacConfig face_cfg = cfg;
    face_cfg.seed = cfg.seed + face_index;
    EstimateReport report;
    try {
      report = ransac_homography(it->second, face_cfg);
    } catch (const Error& e) {
      throw Error(e.code(), "face '" + f.face_id + "': " + e.what());
    }
    homographies.emplace(f.face_id, report.homography);
    diagnostics.push_back({f.face_id, report.inlier_count(),
                           static_cast<int>(it->second.size()),
                           report.mean_inlier_error, report.iterations_run,
                           report.homography});
  }

  Calibration cal = calibrate_from_homographies(ref, homographies);
  cal.faces = std::move(diagnostics);
  return cal;
}

}  // namespace svmetro
