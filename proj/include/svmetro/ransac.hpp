#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "svmetro/homography.hpp"

namespace svmetro {

struct RansacConfig {
  double inlier_threshold = 3.0;  // pixels
  double confidence = 0.999;
  int max_iterations = 2000;
  int min_inliers = 10;
  std::uint64_t seed = 0;

  //! Throws ValidationError on out-of-range fields.
  void validate() const;
};

struct EstimateReport {
  Homography homography;
  std::vector<bool> inlier_mask;
  double mean_inlier_error = 0.0;  // pixels
  int iterations_run = 0;

  int inlier_count() const;
  friend bool operator==(const EstimateReport& a, const EstimateReport& b) {
    return a.homography.matrix() == b.homography.matrix() &&
           a.inlier_mask == b.inlier_mask &&
           a.mean_inlier_error == b.mean_inlier_error &&
           a.iterations_run == b.iterations_run;
  }
};

//! Robust homography fit. Trials are scored in parallel when OpenMP is
//! available; the result is identical to ransac_homography_serial().
EstimateReport ransac_homography(std::span<const Correspondence> corrs,
                                 const RansacConfig& cfg);

//! Single-threaded reference implementation.
EstimateReport ransac_homography_serial(std::span<const Correspondence> corrs,
                                        const RansacConfig& cfg);

namespace ransac_detail {

struct TrialResult {
  bool valid = false;
  int inliers = 0;
  double error_sum = 0.0;
  Eigen::Matrix3d model = Eigen::Matrix3d::Zero();
};

//! Draws the minimal sample for @p trial from (seed, trial) alone, fits and
//! scores it.
TrialResult evaluate_trial(std::span<const Correspondence> corrs,
                           const RansacConfig& cfg, std::uint64_t trial);

//! Iteration bound from inlier ratio and confidence, capped at max_iterations.
int required_iterations(int inliers, int n, const RansacConfig& cfg);

bool better(const TrialResult& candidate, const TrialResult& incumbent);

//! Precondition checks shared by both drivers.
void check_inputs(std::span<const Correspondence> corrs, const RansacConfig& cfg);

//! Refit on the consensus of @p best and assemble the report.
EstimateReport finish(std::span<const Correspondence> corrs,
                      const RansacConfig& cfg, const TrialResult& best,
                      int iterations_run);

}  // namespace ransac_detail

}  // namespace svmetro
