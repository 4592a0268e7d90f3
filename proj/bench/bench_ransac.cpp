// Serial vs OpenMP RANSAC on synthetic faces. Both paths return identical
// reports; this measures only wall time.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <string>

#include "svmetro/ransac.hpp"
#include "svmetro/reference.hpp"
#include "svmetro/synthetic.hpp"

namespace {

using svmetro::Correspondence;

// args: grid side, outlier percentage
std::vector<Correspondence> face_points(const benchmark::State& state) {
  svmetro::SceneConfig cfg;
  cfg.reference = svmetro::load_reference(std::string(SVMETRO_REFERENCE_DIR) + "/box_10cm.json");
  cfg.seed = 11;
  cfg.grid = static_cast<int>(state.range(0));
  cfg.noise_sigma_px = 0.5;
  cfg.outlier_fraction = static_cast<double>(state.range(1)) / 100.0;
  return generate(cfg).faces.front().correspondences;
}

svmetro::RansacConfig fixed_budget() {
  svmetro::RansacConfig cfg;
  cfg.confidence = 1.0 - 1e-15;  // pushes the adaptive bound into the hundreds
  cfg.max_iterations = 2000;
  cfg.seed = 5;
  return cfg;
}

template <auto Estimator>
void run(benchmark::State& state) {
  const auto pts = face_points(state);
  const auto cfg = fixed_budget();
  for (auto _ : state) benchmark::DoNotOptimize(Estimator(pts, cfg));
  state.counters["points"] = static_cast<double>(pts.size());
  state.counters["threads"] = omp_get_max_threads();
}

void BM_RansacSerial(benchmark::State& state) { run<svmetro::ransac_homography_serial>(state); }
void BM_RansacOpenMP(benchmark::State& state) { run<svmetro::ransac_homography>(state); }

void shapes(benchmark::internal::Benchmark* b) {
  for (int grid : {5, 15, 40})
    for (int outliers : {30, 50}) b->Args({grid, outliers});
  b->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK(BM_RansacSerial)->Apply(shapes);
BENCHMARK(BM_RansacOpenMP)->Apply(shapes);
BENCHMARK_MAIN();
