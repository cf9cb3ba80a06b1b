#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "deskew/geometry.hpp"
#include "deskew/motion_correction.hpp"

namespace deskew {

/// Fisheye camera intrinsics: pinhole focal lengths and principal point,
/// skew, and equidistant distortion theta_d = theta (1 + k1 theta^2 +
/// k2 theta^4 + k3 theta^6 + k4 theta^8).
struct CameraIntrinsics {
  double fx{0.0}, fy{0.0};  ///< pixels
  double cx{0.0}, cy{0.0};  ///< pixels
  double skew{0.0};
  double k1{0.0}, k2{0.0}, k3{0.0}, k4{0.0};
  int width{0}, height{0};

  void validate() const;  ///< throws std::invalid_argument
};

/// Points at or behind this camera-frame depth are rejected.
constexpr double kMinCameraDepth = 1e-6;  // meters

/// Projected pixel with propagated 2D covariance.
struct ProjectedPoint {
  Eigen::Vector2d mean{Eigen::Vector2d::Zero()};
  Eigen::Matrix2d cov{Eigen::Matrix2d::Zero()};
  int packet_index{0};
  int point_index{0};
  bool in_frame{false};
};

struct ProjectionResult {
  std::vector<ProjectedPoint> points;  ///< packet-major, point-minor
  /// Points whose sigma set straddles or lies behind the camera plane.
  int dropped_behind_camera{0};
};

/// Project a camera-frame point to pixel coordinates. Returns nullopt when
/// z <= kMinCameraDepth. The on-axis limit theta_d/r -> 1 is used for
/// r < 1e-8.
std::optional<Eigen::Vector2d> project_point(const Eigen::Vector3d& p_cam,
                                             const CameraIntrinsics& intr);

/// Project the corrected sigma set into the image: every sigma point is
/// moved to the camera frame by t_cam_ld, projected, and per-point pixel
/// Gaussians are recovered with the packet weights. A point with any sigma
/// point behind the camera is dropped and counted, not thrown.
ProjectionResult project_omega(const SigmaSetOmega& omega,
                               const HomTransform& t_cam_ld,
                               const CameraIntrinsics& intr);

/// 95% confidence ellipse of a 2x2 covariance: semi-axes and orientation
/// of the major axis, wrapped to (-pi/2, pi/2].
struct Ellipse {
  double a{0.0};      ///< major semi-axis, pixels
  double b{0.0};      ///< minor semi-axis, pixels
  double theta{0.0};  ///< radians
};

Ellipse ellipse_95(const Eigen::Matrix2d& cov);

/// 95% confidence ellipsoid of a 3x3 covariance: semi-axes (descending)
/// and rotation whose columns are the principal directions.
struct Ellipsoid {
  Eigen::Vector3d axes{Eigen::Vector3d::Zero()};
  Eigen::Matrix3d rotation{Eigen::Matrix3d::Identity()};
};

Ellipsoid ellipsoid_95(const Eigen::Matrix3d& cov);

}  // namespace deskew
