#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "svmetro/error.hpp"
#include "svmetro/ransac.hpp"

namespace svmetro {

void RansacConfig::validate() const {
  if (!(inlier_threshold > 0.0))
    fail(ErrorCode::ValidationError, "inlier_threshold must be positive");
  if (!(confidence > 0.0 && confidence < 1.0))
    fail(ErrorCode::ValidationError, "confidence must lie in (0, 1)");
  if (max_iterations < 1)
    fail(ErrorCode::ValidationError, "max_iterations must be at least 1");
  if (min_inliers < 4)
    fail(ErrorCode::ValidationError, "min_inliers must be at least 4");
}

int EstimateReport::inlier_count() const {
  return static_cast<int>(std::count(inlier_mask.begin(), inlier_mask.end(), true));
}

namespace ransac_detail {

namespace {

constexpr int kMaxRedraws = 100;
constexpr double kSampleCollinearTol = 1e-4;

std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

void check_inputs(std::span<const Correspondence> corrs, const RansacConfig& cfg) {
  cfg.validate();
  if (corrs.size() < 4)
    fail(ErrorCode::InsufficientPoints,
         "homography needs at least 4 correspondences, got " +
             std::to_string(corrs.size()));
  if (static_cast<int>(corrs.size()) < cfg.min_inliers)
    fail(ErrorCode::NoConsensus,
         "only " + std::to_string(corrs.size()) + " correspondences, " +
             std::to_string(cfg.min_inliers) + " inliers required");
}

TrialResult evaluate_trial(std::span<const Correspondence> corrs,
                           const RansacConfig& cfg, std::uint64_t trial) {
  auto rng = trial_rng(cfg.seed, trial);
  std::uniform_int_distribution<std::size_t> pick(0, corrs.size() - 1);

  // Degenerate samples are redrawn within the same trial.
  std::array<Correspondence, 4> sample;
  bool found = false;
  for (int attempt = 0; attempt < kMaxRedraws && !found; ++attempt) {
    std::array<std::size_t, 4> idx{};
    for (int k = 0; k < 4; ++k) {
      std::size_t i;
      do {
        i = pick(rng);
      } while (std::find(idx.begin(), idx.begin() + k, i) != idx.begin() + k);
      idx[k] = i;
    }
    std::array<Eigen::Vector2d, 4> src, dst;
    for (int k = 0; k < 4; ++k) {
      sample[k] = corrs[idx[k]];
      src[k] = sample[k].templ;
      dst[k] = sample[k].image;
    }
    found = !has_collinear_triplet(src, kSampleCollinearTol) &&
            !has_collinear_triplet(dst, kSampleCollinearTol);
  }

  TrialResult result;
  if (!found) return result;

  Eigen::Matrix3d h, h_inv;
  double scale = 0.0;
  try {
    const Homography model = estimate_dlt(sample);
    h = model.matrix();
    h_inv = model.inverse();
    scale = model.template_scale();
  } catch (const Error&) {
    return result;
  }

  result.valid = true;
  result.model = h;
  for (const auto& c : corrs) {
    double e;
    try {
      e = transfer_error(h, h_inv, scale, c);
    } catch (const Error&) {
      continue;
    }
    if (e < cfg.inlier_threshold) {
      ++result.inliers;
      result.error_sum += e;
    }
  }
  return result;
}

int required_iterations(int inliers, int n, const RansacConfig& cfg) {
  const double w = static_cast<double>(inliers) / static_cast<double>(n);
  const double w4 = w * w * w * w;
  if (w4 <= 0.0) return cfg.max_iterations;
  if (w4 >= 1.0) return 1;
  const double needed = std::log(1.0 - cfg.confidence) / std::log(1.0 - w4);
  if (!std::isfinite(needed) || needed >= cfg.max_iterations) return cfg.max_iterations;
  return std::max(1, static_cast<int>(std::ceil(needed)));
}

bool better(const TrialResult& candidate, const TrialResult& incumbent) {
  if (!candidate.valid) return false;
  if (!incumbent.valid) return true;
  if (candidate.inliers != incumbent.inliers)
    return candidate.inliers > incumbent.inliers;
  return candidate.error_sum < incumbent.error_sum;
}

EstimateReport finish(std::span<const Correspondence> corrs,
                      const RansacConfig& cfg, const TrialResult& best,
                      int iterations_run) {
  if (!best.valid || best.inliers < cfg.min_inliers)
    fail(ErrorCode::NoConsensus,
         "best model has " + std::to_string(best.valid ? best.inliers : 0) +
             " inliers, " + std::to_string(cfg.min_inliers) + " required");

  const Homography hypothesis(best.model);
  const Eigen::Matrix3d h_inv = hypothesis.inverse();
  const double scale = hypothesis.template_scale();

  std::vector<bool> mask(corrs.size(), false);
  std::vector<Correspondence> consensus;
  consensus.reserve(static_cast<std::size_t>(best.inliers));
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    try {
      if (transfer_error(hypothesis.matrix(), h_inv, scale, corrs[i]) <
          cfg.inlier_threshold) {
        mask[i] = true;
        consensus.push_back(corrs[i]);
      }
    } catch (const Error&) {
    }
  }

  const Homography refit = estimate_dlt(consensus);
  const Eigen::Matrix3d r_inv = refit.inverse();
  const double r_scale = refit.template_scale();
  double sum = 0.0;
  for (const auto& c : consensus) sum += transfer_error(refit.matrix(), r_inv, r_scale, c);

  EstimateReport report;
  report.homography = refit;
  report.inlier_mask = std::move(mask);
  report.mean_inlier_error = sum / static_cast<double>(consensus.size());
  report.iterations_run = iterations_run;
  return report;
}

}  // namespace ransac_detail

}  // namespace svmetro
