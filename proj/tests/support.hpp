#pragma once

#include <cmath>
#include <random>
#include <string>

#include <Eigen/Core>

#include "svmetro/reference.hpp"

namespace svmetro::test {

inline ReferenceObject box_10cm() {
  return load_reference(std::string(SVMETRO_REFERENCE_DIR) + "/box_10cm.json");
}

// Smallest byte string the image sniffer accepts as a PNG of the given size.
inline std::string png_header(std::uint32_t width, std::uint32_t height) {
  std::string out("\x89PNG\r\n\x1a\n\0\0\0\x0dIHDR", 16);
  for (std::uint32_t v : {width, height})
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xff));
  out.append("\x08\x02\0\0\0\0\0\0\0", 9);
  return out;
}

inline double relative_error(double got, double want) {
  return std::abs(got - want) / std::abs(want);
}

// Frobenius distance between two matrices after fixing scale and sign.
inline double projective_distance(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  const Eigen::Matrix3d an = a / a.norm();
  const Eigen::Matrix3d bn = b / b.norm();
  return std::min((an - bn).norm(), (an + bn).norm());
}

struct Rng {
  std::mt19937_64 engine;
  explicit Rng(std::uint64_t seed) : engine(seed) {}
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine);
  }
  double normal(double sigma) { return std::normal_distribution<double>(0.0, sigma)(engine); }
};

}  // namespace svmetro::test
