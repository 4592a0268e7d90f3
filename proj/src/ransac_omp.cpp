#include <algorithm>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "svmetro/ransac.hpp"

namespace svmetro {

namespace {

int batch_size() {
#ifdef _OPENMP
  return std::max(8, 4 * omp_get_max_threads());
#else
  return 8;
#endif
}

}  // namespace

// Trials are evaluated a batch at a time, then replayed in index order so the
// adaptive stopping point and tie-breaks match the serial loop exactly.
EstimateReport ransac_homography(std::span<const Correspondence> corrs,
                                 const RansacConfig& cfg) {
  using namespace ransac_detail;
  check_inputs(corrs, cfg);
  const int n = static_cast<int>(corrs.size());
  const int batch = batch_size();

  std::vector<TrialResult> results(static_cast<std::size_t>(batch));
  TrialResult best;
  int bound = cfg.max_iterations;
  int trial = 0;
  while (trial < bound) {
    const int count = std::min(batch, bound - trial);
#pragma omp parallel for schedule(dynamic, 1)
    for (int k = 0; k < count; ++k) {
      results[static_cast<std::size_t>(k)] =
          evaluate_trial(corrs, cfg, static_cast<std::uint64_t>(trial + k));
    }
    for (int k = 0; k < count && trial < bound; ++k, ++trial) {
      auto& r = results[static_cast<std::size_t>(k)];
      if (better(r, best)) {
        best = r;
        bound = required_iterations(best.inliers, n, cfg);
      }
    }
  }
  return finish(corrs, cfg, best, trial);
}

}  // namespace svmetro
