#include "svmetro/homography.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "svmetro/error.hpp"

namespace svmetro {

namespace {

// Smallest over largest singular value of the canonical matrix. A determinant
// test is unusable here: entries mix millimeter and pixel scales.
constexpr double kSingularRatio = 1e-12;
constexpr double kDltCollinearTol = 1e-9;

// Zero centroid, mean distance sqrt(2).
Eigen::Matrix3d hartley_transform(std::span<const Eigen::Vector2d> pts) {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());

  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (p - centroid).norm();
  mean_dist /= static_cast<double>(pts.size());

  const double s = mean_dist > 0.0 ? std::numbers::sqrt2 / mean_dist : 1.0;
  Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
  t(0, 0) = s;
  t(1, 1) = s;
  t(0, 2) = -s * centroid.x();
  t(1, 2) = -s * centroid.y();
  return t;
}

Eigen::Vector2d apply(const Eigen::Matrix3d& t, const Eigen::Vector2d& p) {
  return (t * p.homogeneous()).hnormalized();
}

}  // namespace

Eigen::Matrix3d canonicalize(const Eigen::Matrix3d& m) {
  const double n = m.norm();
  if (!(n > 0.0) || !std::isfinite(n))
    fail(ErrorCode::DegenerateConfiguration, "homography matrix is zero or not finite");
  Eigen::Matrix3d c = m / n;
  Eigen::Index r = 0;
  Eigen::Index k = 0;
  c.cwiseAbs().maxCoeff(&r, &k);
  if (c(r, k) < 0) c = -c;
  return c;
}

Homography::Homography(const Eigen::Matrix3d& m) : m_(canonicalize(m)) {
  const Eigen::Vector3d sv = Eigen::JacobiSVD<Eigen::Matrix3d>(m_).singularValues();
  if (!(sv(2) > kSingularRatio * sv(0)))
    fail(ErrorCode::DegenerateConfiguration, "homography is singular");
}

double Homography::template_scale() const {
  const double w = m_(2, 2);
  if (std::abs(w) <= kZeroEps)
    fail(ErrorCode::MappedToInfinity, "template origin maps to infinity");
  return std::sqrt(std::abs(m_.determinant() / (w * w * w)));
}

Homog3 apply_point(const Homography& h, const Homog3& p) {
  return Homog3(Eigen::Vector3d(h.matrix() * p.vec()));
}

Homog3 map_line(const Homography& h, const Homog3& l) {
  return Homog3(Eigen::Vector3d(h.inverse().transpose() * l.vec()));
}

bool all_collinear(std::span<const Eigen::Vector2d> pts, double rel_tol) {
  if (pts.size() < 3) return true;
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  Eigen::Matrix2d scatter = Eigen::Matrix2d::Zero();
  for (const auto& p : pts) {
    const Eigen::Vector2d d = p - centroid;
    scatter += d * d.transpose();
  }
  const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(
                                 scatter, Eigen::EigenvaluesOnly)
                                 .eigenvalues();
  if (ev(1) <= kZeroEps) return true;
  return std::sqrt(std::max(ev(0), 0.0) / ev(1)) <= rel_tol;
}

bool has_collinear_triplet(std::span<const Eigen::Vector2d> pts,
                           double rel_tol) {
  const std::size_t n = pts.size();
  if (n < 3) return false;
  double spread2 = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      spread2 = std::max(spread2, (pts[i] - pts[j]).squaredNorm());
  if (spread2 <= 0.0) return true;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        const Eigen::Vector2d u = pts[j] - pts[i];
        const Eigen::Vector2d v = pts[k] - pts[i];
        const double area2 = std::abs(u.x() * v.y() - u.y() * v.x());
        if (area2 <= rel_tol * spread2) return true;
      }
  return false;
}

Homography estimate_dlt(std::span<const Correspondence> corrs) {
  const auto n = static_cast<Eigen::Index>(corrs.size());
  if (n < 4)
    fail(ErrorCode::InsufficientPoints,
         "homography needs at least 4 correspondences, got " + std::to_string(n));

  std::vector<Eigen::Vector2d> src(corrs.size());
  std::vector<Eigen::Vector2d> dst(corrs.size());
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    src[i] = corrs[i].templ;
    dst[i] = corrs[i].image;
  }
  const bool degenerate =
      n == 4 ? has_collinear_triplet(src, kDltCollinearTol) ||
                   has_collinear_triplet(dst, kDltCollinearTol)
             : all_collinear(src, kDltCollinearTol) ||
                   all_collinear(dst, kDltCollinearTol);
  if (degenerate)
    fail(ErrorCode::DegenerateConfiguration,
         "template or image points are collinear or coincident");

  const Eigen::Matrix3d ts = hartley_transform(src);
  const Eigen::Matrix3d td = hartley_transform(dst);

  Eigen::MatrixXd a(2 * n, 9);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector2d s = apply(ts, src[i]);
    const Eigen::Vector2d d = apply(td, dst[i]);
    const double x = s.x(), y = s.y(), u = d.x(), v = d.y();
    a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }

  Eigen::Matrix<double, 9, 1> h;
  if (n == 4) {
    // 8x9: pad to square so the full V has the null vector.
    Eigen::Matrix<double, 9, 9> sq = Eigen::Matrix<double, 9, 9>::Zero();
    sq.topRows(8) = a;
    Eigen::JacobiSVD<Eigen::Matrix<double, 9, 9>> svd(sq, Eigen::ComputeFullV);
    h = svd.matrixV().col(8);
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
    h = svd.matrixV().col(8);
  }

  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  return Homography(td.inverse() * hn * ts);
}

double transfer_error(const Eigen::Matrix3d& h, const Eigen::Matrix3d& h_inv,
                      double scale, const Correspondence& c) {
  const Eigen::Vector3d fwd = h * c.templ.homogeneous();
  const Eigen::Vector3d bwd = h_inv * c.image.homogeneous();
  if (std::abs(fwd.z()) <= kIdealEps * fwd.norm() ||
      std::abs(bwd.z()) <= kIdealEps * bwd.norm())
    fail(ErrorCode::MappedToInfinity, "correspondence maps to infinity");
  const double e_img = (fwd.hnormalized() - c.image).norm();
  const double e_tpl = (bwd.hnormalized() - c.templ).norm();
  return e_img + scale * e_tpl;
}

double transfer_error(const Homography& h, const Correspondence& c) {
  return transfer_error(h.matrix(), h.inverse(), h.template_scale(), c);
}

}  // namespace svmetro
