#include "svmetro/ransac.hpp"

namespace svmetro {

EstimateReport ransac_homography_serial(std::span<const Correspondence> corrs,
                                        const RansacConfig& cfg) {
  using namespace ransac_detail;
  check_inputs(corrs, cfg);
  const int n = static_cast<int>(corrs.size());

  TrialResult best;
  int bound = cfg.max_iterations;
  int trial = 0;
  for (; trial < bound; ++trial) {
    TrialResult r = evaluate_trial(corrs, cfg, static_cast<std::uint64_t>(trial));
    if (better(r, best)) {
      best = std::move(r);
      bound = required_iterations(best.inliers, n, cfg);
    }
  }
  return finish(corrs, cfg, best, trial);
}

}  // namespace svmetro
