#include "svmetro/geometry.hpp"

#include <cmath>

#include "svmetro/error.hpp"

namespace svmetro {

bool projectively_equal(const Homog3& x, const Homog3& y, double rel_tol) {
  const double scale = x.norm() * y.norm();
  if (scale <= 0.0) return scale == 0.0 && x.norm() == y.norm();
  return x.vec().cross(y.vec()).norm() <= rel_tol * scale;
}

Homog3 cross(const Homog3& p, const Homog3& q) {
  if (p.norm() <= kZeroEps || q.norm() <= kZeroEps)
    fail(ErrorCode::DegenerateInput, "cross product of a zero vector");
  if (projectively_equal(p, q))
    fail(ErrorCode::DegenerateInput,
         "cross product of projectively equal elements");
  return raw_cross(p, q);
}

Homog3 normalize(const Homog3& x) {
  const Eigen::Vector3d& v = x.vec();
  if (v.cwiseAbs().maxCoeff() <= kZeroEps)
    fail(ErrorCode::ZeroVector, "cannot normalize a zero homogeneous vector");
  const double n = v.norm();
  if (std::abs(v.z()) > kIdealEps * n) return Homog3(Eigen::Vector3d(v / v.z()));

  Eigen::Vector3d u = v / n;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(u[i]) > kIdealEps) {
      if (u[i] < 0) u = -u;
      break;
    }
  }
  return Homog3(u);
}

Homog3 unit(const Homog3& x) {
  const double n = x.norm();
  if (n <= kZeroEps)
    fail(ErrorCode::ZeroVector, "cannot scale a zero homogeneous vector");
  return x * (1.0 / n);
}

double incidence_residual(const Homog3& p, const Homog3& l) {
  if (p.is_ideal())
    fail(ErrorCode::NotFinite, "incidence residual needs a finite point");
  const double ab = std::hypot(l.a(), l.b());
  if (ab <= kZeroEps * l.norm() || ab <= kZeroEps)
    fail(ErrorCode::DegenerateLine, "line at infinity has no Euclidean distance");
  const Eigen::Vector2d e = p.euclidean();
  return std::abs(l.a() * e.x() + l.b() * e.y() + l.c()) / ab;
}

Homog3 project_onto_line(const Homog3& p, const Homog3& l) {
  if (p.is_ideal())
    fail(ErrorCode::NotFinite, "cannot project an ideal point");
  const double a = l.a();
  const double b = l.b();
  const double c = l.c();
  const double ab2 = a * a + b * b;
  if (std::sqrt(ab2) <= kZeroEps)
    fail(ErrorCode::DegenerateLine, "line has no finite direction");

  const Eigen::Vector2d e = p.euclidean();
  const double signed_res = a * e.x() + b * e.y() + c;
  // Rounding floor of the residual evaluation itself.
  const double magnitude = std::abs(a * e.x()) + std::abs(b * e.y()) + std::abs(c);
  if (std::abs(signed_res) <= 1e-12 * magnitude) return p;

  const double k = signed_res / ab2;
  return Homog3::point(e.x() - k * a, e.y() - k * b);
}

double collinearity(const Homog3& p, const Homog3& q, const Homog3& r) {
  Eigen::Matrix3d m;
  m.col(0) = unit(p).vec();
  m.col(1) = unit(q).vec();
  m.col(2) = unit(r).vec();
  return m.determinant();
}

}  // namespace svmetro
