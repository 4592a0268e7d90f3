#pragma once

#include <map>
#include <string>
#include <vector>

#include "svmetro/geometry.hpp"
#include "svmetro/homography.hpp"
#include "svmetro/ransac.hpp"
#include "svmetro/reference.hpp"

namespace svmetro {

// |l.b| thresholds with l at unit norm and b at w = 1.
inline constexpr double kHorizonHardLimit = 1e-6;
inline constexpr double kHorizonLowConfidence = 1e-3;

struct FaceDiagnostics {
  std::string face_id;
  int inliers = 0;
  int total = 0;
  double mean_inlier_error_px = 0.0;
  int iterations = 0;
  Homography homography;
};

struct Calibration {
  Homog3 l;    // vanishing line of the ground plane
  Homog3 v;    // vanishing point of the reference direction
  Homog3 b_r;  // imaged reference base
  Homog3 t_r;  // imaged reference top, snapped onto v x b_r
  double alpha = 0.0;  // 1/mm
  double reference_height_mm = 0.0;

  std::vector<FaceDiagnostics> faces;
  // Largest |unit(line) . unit(v)| over reference-direction lines not used to
  // build v; zero when only one pair is available.
  double v_consistency = 0.0;
  // Distance the mapped top anchor moved when snapped onto v x b_r.
  double t_r_alignment_shift_px = 0.0;
};

struct Measurement {
  Homog3 b_x;
  Homog3 t_x_raw;
  Homog3 t_x_aligned;
  double height_mm = 0.0;
  double alignment_shift_px = 0.0;
  // |l.b_x| (normalized) and whether it falls under the low-confidence limit.
  double horizon_proximity = 0.0;
  bool low_confidence = false;
};

using CorrespondenceMap = std::map<std::string, std::vector<Correspondence>>;

Homog3 vanishing_point_of_pair(const Homog3& l1, const Homog3& l2);
Homog3 vanishing_line_of_plane(const Homog3& vp1, const Homog3& vp2);

//! Snap @p t_x_raw onto the line through @p v and @p b_x.
Homog3 align_input(const Homog3& v, const Homog3& b_x, const Homog3& t_x_raw);

//! Metric factor from the imaged reference segment. t_r is snapped onto
//! v x b_r first, the same way measure_height treats user picks.
double metric_factor(const Homog3& l, const Homog3& v, const Homog3& b_r,
                     const Homog3& t_r, double reference_height_mm);

Measurement measure_height(const Calibration& cal, const Homog3& b_x,
                           const Homog3& t_x_raw);

Calibration calibrate(const ReferenceObject& ref,
                      const CorrespondenceMap& corrs_per_face,
                      const RansacConfig& cfg);

//! Calibration from known face homographies, skipping estimation. Used by
//! calibrate() and by ground-truth checks.
Calibration calibrate_from_homographies(
    const ReferenceObject& ref, const std::map<std::string, Homography>& homographies);

}  // namespace svmetro
