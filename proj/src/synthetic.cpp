#include "svmetro/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "svmetro/error.hpp"

namespace svmetro {

namespace {

constexpr int kMaxPoseDraws = 10000;

double deg(double d) { return d * std::numbers::pi / 180.0; }

Eigen::Vector3d box_center(const std::map<std::string, FacePose>& poses,
                           const ReferenceObject& ref) {
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto& f : ref.faces)
    sum += poses.at(f.face_id).at({f.width_mm / 2, f.height_mm / 2});
  return sum / static_cast<double>(ref.faces.size());
}

// Every face seen from its outer side and every corner in front of the camera.
bool sees_all_faces(const Camera& cam, const std::map<std::string, FacePose>& poses,
                    const ReferenceObject& ref, double min_cosine) {
  const Eigen::Vector3d c = cam.center();
  for (const auto& f : ref.faces) {
    const FacePose& pose = poses.at(f.face_id);
    const Eigen::Vector3d mid = pose.at({f.width_mm / 2, f.height_mm / 2});
    if (pose.normal().dot((c - mid).normalized()) < min_cosine) return false;
    for (double u : {0.0, f.width_mm})
      for (double v : {0.0, f.height_mm}) {
        const Eigen::Vector3d xc = cam.rotation * pose.at({u, v}) + cam.translation;
        if (xc.z() <= 0.0) return false;
      }
  }
  return true;
}

}  // namespace

Eigen::Matrix3d Camera::intrinsics() const {
  Eigen::Matrix3d k;
  k << fx, 0, cx, 0, fy, cy, 0, 0, 1;
  return k;
}

Eigen::Matrix<double, 3, 4> Camera::projection() const {
  Eigen::Matrix<double, 3, 4> rt;
  rt << rotation, translation;
  return intrinsics() * rt;
}

void Camera::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0))
    fail(ErrorCode::ValidationError, "focal lengths must be positive");
  const double ortho = (rotation * rotation.transpose() - Eigen::Matrix3d::Identity()).norm();
  if (ortho > 1e-10 || rotation.determinant() < 0.0)
    fail(ErrorCode::ValidationError, "rotation is not orthonormal");
  if (std::abs(center().z()) <= kZeroEps)
    fail(ErrorCode::ValidationError, "camera center lies on the ground plane");
}

Camera look_at(const Eigen::Vector3d& center, const Eigen::Vector3d& target,
               double focal, double cx, double cy) {
  const Eigen::Vector3d forward = (target - center).normalized();
  const Eigen::Vector3d right = forward.cross(Eigen::Vector3d::UnitZ()).normalized();
  const Eigen::Vector3d down = forward.cross(right);
  Camera cam;
  cam.fx = cam.fy = focal;
  cam.cx = cx;
  cam.cy = cy;
  cam.rotation.row(0) = right;
  cam.rotation.row(1) = down;
  cam.rotation.row(2) = forward;
  cam.translation = -cam.rotation * center;
  return cam;
}

Homog3 project(const Camera& cam, const Eigen::Vector3d& x_world) {
  const Eigen::Vector3d xc = cam.rotation * x_world + cam.translation;
  if (xc.z() <= 0.0) fail(ErrorCode::BehindCamera, "point is behind the camera");
  return normalize(Homog3(Eigen::Vector3d(cam.intrinsics() * xc)));
}

std::map<std::string, FacePose> box_layout(const ReferenceObject& ref) {
  const FaceTemplate* front = ref.find_face(ref.anchor_face);
  if (front == nullptr) fail(ErrorCode::ValidationError, "reference has no anchor face");
  const double w = front->width_mm;
  const double h = front->height_mm;

  std::map<std::string, FacePose> poses;
  poses[front->face_id] = {Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitX(),
                           Eigen::Vector3d::UnitZ()};
  int side = 0;
  for (const auto& f : ref.faces) {
    if (f.face_id == front->face_id) continue;
    if (f.role == FaceRole::GroundPlane) {
      poses[f.face_id] = {Eigen::Vector3d(0, 0, h), Eigen::Vector3d::UnitX(),
                          Eigen::Vector3d::UnitY()};
    } else if (side++ % 2 == 0) {
      poses[f.face_id] = {Eigen::Vector3d(w, 0, 0), Eigen::Vector3d::UnitY(),
                          Eigen::Vector3d::UnitZ()};
    } else {
      poses[f.face_id] = {Eigen::Vector3d(0, f.width_mm, 0), -Eigen::Vector3d::UnitY(),
                          Eigen::Vector3d::UnitZ()};
    }
  }
  return poses;
}

Homography face_homography(const Camera& cam, const FacePose& pose) {
  Eigen::Matrix<double, 4, 3> m = Eigen::Matrix<double, 4, 3>::Zero();
  m.block<3, 1>(0, 0) = pose.axis_u;
  m.block<3, 1>(0, 1) = pose.axis_v;
  m.block<3, 1>(0, 2) = pose.origin;
  m(3, 2) = 1.0;
  return Homography(cam.projection() * m);
}

void SceneConfig::validate() const {
  if (!(noise_sigma_px >= 0.0)) fail(ErrorCode::ValidationError, "noise_sigma must be >= 0");
  if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0))
    fail(ErrorCode::ValidationError, "outlier_fraction must lie in [0, 1)");
  for (double h : object_heights_mm)
    if (!(h > 0.0)) fail(ErrorCode::ValidationError, "object heights must be positive");
  if (grid < 2) fail(ErrorCode::ValidationError, "grid must be at least 2");
  if (image_width <= 0 || image_height <= 0)
    fail(ErrorCode::ValidationError, "image size must be positive");
  if (camera) camera->validate();
}

std::map<std::string, std::vector<Correspondence>> SyntheticScene::correspondence_map() const {
  std::map<std::string, std::vector<Correspondence>> out;
  for (const auto& f : faces) out[f.face_id] = f.correspondences;
  return out;
}

std::map<std::string, Homography> SyntheticScene::true_homographies() const {
  std::map<std::string, Homography> out;
  for (const auto& f : faces) out.emplace(f.face_id, f.true_homography);
  return out;
}

SyntheticScene generate(const SceneConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit01(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit01(rng); };

  const ReferenceObject& ref = cfg.reference;
  const auto poses = cfg.face_poses.empty() ? box_layout(ref) : cfg.face_poses;
  for (const auto& f : ref.faces)
    if (!poses.count(f.face_id))
      fail(ErrorCode::ValidationError, "no pose for face '" + f.face_id + "'");

  SyntheticScene scene;
  scene.reference = ref;
  scene.image_width = cfg.image_width;
  scene.image_height = cfg.image_height;
  scene.seed = cfg.seed;
  scene.noise_sigma_px = cfg.noise_sigma_px;

  const double cx = cfg.image_width / 2.0;
  const double cy = cfg.image_height / 2.0;
  const Eigen::Vector3d target = box_center(poses, ref);

  if (cfg.camera) {
    scene.camera = *cfg.camera;
    if (!sees_all_faces(scene.camera, poses, ref, 0.0))
      fail(ErrorCode::InvalidPose, "camera does not see every face from the front");
  } else {
    const PoseRanges& r = cfg.ranges;
    bool ok = false;
    for (int draw = 0; draw < kMaxPoseDraws && !ok; ++draw) {
      const double elevation = deg(uniform(r.elevation_min_deg, r.elevation_max_deg));
      const double yaw = uniform(-std::numbers::pi, std::numbers::pi);
      const double distance = uniform(r.distance_min_mm, r.distance_max_mm);
      const double focal = uniform(r.focal_min_px, r.focal_max_px);
      const Eigen::Vector3d dir(std::cos(elevation) * std::sin(yaw),
                                -std::cos(elevation) * std::cos(yaw), std::sin(elevation));
      scene.camera = look_at(target + distance * dir, target, focal, cx, cy);
      ok = sees_all_faces(scene.camera, poses, ref, r.min_facing_cosine);
    }
    if (!ok) fail(ErrorCode::InvalidPose, "no admissible random pose found");
  }

  const Camera& cam = scene.camera;
  const double clearance = 5.0 * cfg.noise_sigma_px + cfg.outlier_threshold_px;
  std::normal_distribution<double> noise(0.0, 1.0);

  for (const auto& f : ref.faces) {
    SyntheticFace face;
    face.face_id = f.face_id;
    face.pose = poses.at(f.face_id);
    face.true_homography = face_homography(cam, face.pose);

    for (int i = 0; i < cfg.grid; ++i)
      for (int j = 0; j < cfg.grid; ++j) {
        const Eigen::Vector2d uv(f.width_mm * j / (cfg.grid - 1),
                                 f.height_mm * i / (cfg.grid - 1));
        Eigen::Vector2d px = project(cam, face.pose.at(uv)).euclidean();
        if (cfg.noise_sigma_px > 0.0) {
          px.x() += cfg.noise_sigma_px * noise(rng);
          px.y() += cfg.noise_sigma_px * noise(rng);
        }
        face.correspondences.push_back({uv, px});
      }
    face.is_outlier.assign(face.correspondences.size(), false);

    const auto n_out = static_cast<std::size_t>(
        std::lround(cfg.outlier_fraction * static_cast<double>(face.correspondences.size())));
    std::vector<std::size_t> order(face.correspondences.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t k = 0; k < n_out; ++k) {
      Correspondence& c = face.correspondences[order[k]];
      const Eigen::Vector2d truth = project(cam, face.pose.at(c.templ)).euclidean();
      Eigen::Vector2d p;
      do {
        p = {uniform(0.0, cfg.image_width), uniform(0.0, cfg.image_height)};
      } while ((p - truth).norm() < clearance);
      c.image = p;
      face.is_outlier[order[k]] = true;
    }
    scene.faces.push_back(std::move(face));
  }

  // Ground plane z = 0: its line at infinity and the vertical vanishing point.
  const Eigen::Matrix<double, 3, 4> p = cam.projection();
  Eigen::Matrix3d ground;
  ground << p.col(0), p.col(1), p.col(3);
  scene.true_l = normalize(Homog3(Eigen::Vector3d(ground.inverse().transpose() *
                                                  Eigen::Vector3d::UnitZ())));
  scene.true_v = normalize(Homog3(Eigen::Vector3d(p.col(2))));

  const FacePose& anchor = poses.at(ref.anchor_face);
  scene.true_b_r = project(cam, anchor.at(ref.base_anchor));
  scene.true_t_r = project(cam, anchor.at(ref.top_anchor));

  // Objects stand on the ground in front of the box.
  const FaceTemplate* front = ref.find_face(ref.anchor_face);
  for (double height : cfg.object_heights_mm) {
    SyntheticObject obj;
    obj.height_mm = height;
    bool placed = false;
    for (int draw = 0; draw < kMaxPoseDraws && !placed; ++draw) {
      obj.base_world = {uniform(-0.5 * front->width_mm, 1.5 * front->width_mm),
                        uniform(-1.5 * front->width_mm, -0.2 * front->width_mm), 0.0};
      const Eigen::Vector3d top = obj.base_world + height * Eigen::Vector3d::UnitZ();
      const Eigen::Vector3d cb = cam.rotation * obj.base_world + cam.translation;
      const Eigen::Vector3d ct = cam.rotation * top + cam.translation;
      placed = cb.z() > 0.0 && ct.z() > 0.0;
      if (placed) {
        obj.b_x = project(cam, obj.base_world);
        obj.t_x = project(cam, top);
      }
    }
    if (!placed) fail(ErrorCode::InvalidPose, "cannot place object in front of the camera");
    scene.objects.push_back(obj);
  }
  return scene;
}

}  // namespace svmetro
