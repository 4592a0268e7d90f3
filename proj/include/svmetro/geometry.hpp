#pragma once

#include <Eigen/Dense>

namespace svmetro {

// Relative threshold below which the last coordinate marks an ideal element.
inline constexpr double kIdealEps = 1e-12;
// Absolute threshold for zero tests.
inline constexpr double kZeroEps = 1e-12;
// Relative threshold for projective equality (norm of the cross product).
inline constexpr double kProjectiveEps = 1e-12;

//! @brief Homogeneous 3-vector, read as a 2D point or a 2D line by context.
class Homog3 {
 public:
  Homog3() = default;
  Homog3(double a, double b, double c) : v_(a, b, c) {}
  explicit Homog3(const Eigen::Vector3d& v) : v_(v) {}

  static Homog3 point(double x, double y) { return {x, y, 1.0}; }
  static Homog3 point(const Eigen::Vector2d& p) { return {p.x(), p.y(), 1.0}; }

  double a() const { return v_.x(); }
  double b() const { return v_.y(); }
  double c() const { return v_.z(); }
  double operator[](int i) const { return v_[i]; }

  const Eigen::Vector3d& vec() const { return v_; }
  double norm() const { return v_.norm(); }
  double dot(const Homog3& o) const { return v_.dot(o.v_); }

  Homog3 operator*(double k) const { return Homog3(Eigen::Vector3d(v_ * k)); }
  Homog3 operator-() const { return Homog3(Eigen::Vector3d(-v_)); }

  bool is_ideal() const { return std::abs(v_.z()) <= kIdealEps * v_.norm(); }

  //! Inhomogeneous coordinates; the caller guarantees the point is finite.
  Eigen::Vector2d euclidean() const { return v_.hnormalized(); }

  friend bool operator==(const Homog3&, const Homog3&) = default;

 private:
  Eigen::Vector3d v_ = Eigen::Vector3d::Zero();
};

//! Join of two points or meet of two lines.
//! Throws DegenerateInput when the inputs are projectively equal.
Homog3 cross(const Homog3& p, const Homog3& q);

//! Cross product without the degeneracy check.
inline Homog3 raw_cross(const Homog3& p, const Homog3& q) {
  return Homog3(Eigen::Vector3d(p.vec().cross(q.vec())));
}

bool projectively_equal(const Homog3& x, const Homog3& y,
                        double rel_tol = kProjectiveEps);

//! Finite elements get c = 1; ideal ones get unit norm with the first
//! nonzero component positive.
Homog3 normalize(const Homog3& x);

//! Scale to unit Euclidean norm (sign untouched).
Homog3 unit(const Homog3& x);

//! Perpendicular distance in pixels from finite point @p p to line @p l.
double incidence_residual(const Homog3& p, const Homog3& l);

//! Foot of the perpendicular from @p p onto @p l.
//! A point already on the line (to rounding) is returned unchanged.
Homog3 project_onto_line(const Homog3& p, const Homog3& l);

//! det[p | q | r] with each argument scaled to unit norm.
double collinearity(const Homog3& p, const Homog3& q, const Homog3& r);

}  // namespace svmetro
