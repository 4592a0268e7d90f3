#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "svmetro/geometry.hpp"

namespace svmetro {

//! One template-to-image point match. Template in millimeters, image in pixels.
struct Correspondence {
  Eigen::Vector2d templ;
  Eigen::Vector2d image;
};

//! @brief Plane-to-image projective map stored in canonical scale.
//!
//! Canonical scale: unit Frobenius norm, with the largest-magnitude entry
//! positive. Construction rejects (near-)singular matrices.
class Homography {
 public:
  Homography() : Homography(Eigen::Matrix3d::Identity()) {}
  explicit Homography(const Eigen::Matrix3d& m);

  const Eigen::Matrix3d& matrix() const { return m_; }
  Eigen::Matrix3d inverse() const { return m_.inverse(); }

  //! Jacobian scale of the map at the template origin (pixels per mm).
  double template_scale() const;

  //! Frobenius distance between canonical forms.
  double distance(const Homography& other) const {
    return (m_ - other.m_).norm();
  }

 private:
  Eigen::Matrix3d m_;
};

Eigen::Matrix3d canonicalize(const Eigen::Matrix3d& m);

//! h * p, not normalized.
Homog3 apply_point(const Homography& h, const Homog3& p);

//! Image of line @p l: h^{-T} l.
Homog3 map_line(const Homography& h, const Homog3& l);

//! Hartley-normalized direct linear transform over all correspondences.
Homography estimate_dlt(std::span<const Correspondence> corrs);

//! Forward image distance plus backward template distance converted to
//! pixels with template_scale().
double transfer_error(const Homography& h, const Correspondence& c);

//! Same metric with a precomputed inverse and scale, for inner loops.
double transfer_error(const Eigen::Matrix3d& h, const Eigen::Matrix3d& h_inv,
                      double scale, const Correspondence& c);

//! True when any three of the given points are collinear (relative to the
//! spread of the set) or any two coincide.
bool has_collinear_triplet(std::span<const Eigen::Vector2d> pts,
                           double rel_tol);

//! True when all points lie on one line or coincide.
bool all_collinear(std::span<const Eigen::Vector2d> pts, double rel_tol);

}  // namespace svmetro
