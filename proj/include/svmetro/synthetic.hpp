#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "svmetro/geometry.hpp"
#include "svmetro/homography.hpp"
#include "svmetro/reference.hpp"

namespace svmetro {

//! Pinhole camera; world-to-camera is X_c = R X_w + t, camera y points down.
struct Camera {
  double fx = 1000.0;
  double fy = 1000.0;
  double cx = 960.0;
  double cy = 540.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();  // mm

  Eigen::Matrix3d intrinsics() const;
  Eigen::Matrix<double, 3, 4> projection() const;
  Eigen::Vector3d center() const { return -rotation.transpose() * translation; }

  //! Throws ValidationError when the invariants do not hold.
  void validate() const;
};

//! Camera at @p center looking at @p target with world +z up.
Camera look_at(const Eigen::Vector3d& center, const Eigen::Vector3d& target,
               double focal, double cx, double cy);

//! Pinhole projection of a world point. Throws BehindCamera for depth <= 0.
Homog3 project(const Camera& cam, const Eigen::Vector3d& x_world);

//! Placement of a face template in the world: X = origin + u * axis_u + v * axis_v.
struct FacePose {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  Eigen::Vector3d axis_u = Eigen::Vector3d::UnitX();
  Eigen::Vector3d axis_v = Eigen::Vector3d::UnitY();

  Eigen::Vector3d at(const Eigen::Vector2d& uv) const {
    return origin + uv.x() * axis_u + uv.y() * axis_v;
  }
  Eigen::Vector3d normal() const { return axis_u.cross(axis_v).normalized(); }
};

//! Box placement: the anchor face stands on the ground (z = 0) facing -y with
//! its template +y along world +z; ground_plane faces lie on top of it;
//! further reference faces wrap around the right and left sides.
std::map<std::string, FacePose> box_layout(const ReferenceObject& ref);

//! Template-plane to image homography implied by the camera and face pose.
Homography face_homography(const Camera& cam, const FacePose& pose);

struct PoseRanges {
  double elevation_min_deg = 10.0;
  double elevation_max_deg = 60.0;
  double distance_min_mm = 300.0;
  double distance_max_mm = 2000.0;
  double focal_min_px = 900.0;
  double focal_max_px = 1400.0;
  // Minimum cosine between a face normal and the direction to the camera.
  double min_facing_cosine = 0.15;
};

struct SceneConfig {
  ReferenceObject reference;
  std::vector<double> object_heights_mm;
  std::optional<Camera> camera;  // random pose from `ranges` when empty
  PoseRanges ranges;
  double noise_sigma_px = 0.0;
  double outlier_fraction = 0.0;
  // Outliers land at least 5 sigma + this far from their true projection.
  double outlier_threshold_px = 3.0;
  int grid = 5;
  int image_width = 1920;
  int image_height = 1080;
  std::uint64_t seed = 0;
  std::map<std::string, FacePose> face_poses;  // box_layout() when empty

  void validate() const;
};

struct SyntheticFace {
  std::string face_id;
  FacePose pose;
  std::vector<Correspondence> correspondences;
  std::vector<bool> is_outlier;
  Homography true_homography;
};

struct SyntheticObject {
  double height_mm = 0.0;
  Eigen::Vector3d base_world = Eigen::Vector3d::Zero();
  Homog3 b_x;
  Homog3 t_x;
};

struct SyntheticScene {
  ReferenceObject reference;
  Camera camera;
  int image_width = 0;
  int image_height = 0;
  std::uint64_t seed = 0;
  double noise_sigma_px = 0.0;
  std::vector<SyntheticFace> faces;
  Homog3 true_l;
  Homog3 true_v;
  Homog3 true_b_r;
  Homog3 true_t_r;
  std::vector<SyntheticObject> objects;

  std::map<std::string, std::vector<Correspondence>> correspondence_map() const;
  std::map<std::string, Homography> true_homographies() const;
};

//! Deterministic in cfg (including seed). Throws InvalidPose when a fixed
//! camera does not see every face from the front.
SyntheticScene generate(const SceneConfig& cfg);

}  // namespace svmetro
