#pragma once

#include <Eigen/Dense>
#include <vector>

#include "deskew/geometry.hpp"
#include "deskew/unscented.hpp"

namespace deskew {

/// Body-frame velocity reading: linear (m/s, x forward) and angular
/// (rad/s, roll/pitch/yaw rates).
struct KinematicMeasurement {
  Eigen::Vector3d v{Eigen::Vector3d::Zero()};
  Eigen::Vector3d w{Eigen::Vector3d::Zero()};
  double timestamp{0.0};
};

/// Measurement noise model for the ego-motion estimator.
struct NoiseConfig {
  Eigen::Matrix3d cov_v{Eigen::Matrix3d::Zero()};  ///< (m/s)^2
  Eigen::Matrix3d cov_w{Eigen::Matrix3d::Zero()};  ///< (rad/s)^2
  double sigma_t{0.0};                             ///< timestamp jitter, s
  /// Use only the x component of linear velocity readings; the y/z
  /// components and their noise rows are zeroed.
  bool use_vx_only{false};
  /// Diagonal of the near-zero reference-pose covariance.
  double ref_pose_var{1e-12};
};

/// Gaussian 6-DOF delta pose of packet i relative to the reference time:
/// pose of the vehicle frame at t_i expressed in the vehicle frame at
/// t_ref, so pose_to_transform(mean) maps coordinates at t_i into
/// coordinates at t_ref.
struct EgoPoseEstimate {
  int packet_index{0};
  GaussianState pose;  ///< d = 6
};

/// Layout of the augmented state vector:
///   [pose(6), v(3), w(3), t_origin, t_target], dt = t_target - t_origin.
/// dt is negative along the backward chain.
constexpr int kAugmentedDim = 14;

/// Augmented state for one propagation step: block-diagonal covariance
/// [pose cov, cov_v, cov_w, sigma_t^2, sigma_t^2].
GaussianState assemble_augmented_state(const GaussianState& pose,
                                       const KinematicMeasurement& meas,
                                       const NoiseConfig& noise,
                                       double t_origin, double t_target);

/// Constant-turn-rate-and-velocity step in the body frame: exact planar
/// closed form for (x, y, yaw) driven by (v_x, v_y, w_yaw); z, roll and
/// pitch integrate first order. dt may be negative.
Pose6D ctrv_step(const Pose6D& start, const Eigen::Vector3d& v,
                 const Eigen::Vector3d& w, double dt);

/// Kinematic model over an augmented state vector; returns the propagated
/// 6-DOF pose (angles unwrapped).
Vector6d kinematic_model(const Eigen::Matrix<double, kAugmentedDim, 1>& aug);

/// Estimate the Gaussian delta pose of the vehicle at every packet
/// timestamp relative to t_ref. Packets before t_ref are covered by a
/// backward chain (nearest to t_ref first), packets at or after t_ref by a
/// forward chain; each step decomposes the augmented state into sigma
/// points, propagates them through the kinematic model and recovers the
/// next pose Gaussian. Measurements are associated by nearest timestamp.
///
/// Returns one estimate per packet, ordered by packet index.
std::vector<EgoPoseEstimate> estimate_ego_motion(
    const std::vector<double>& scan_timestamps,
    const std::vector<KinematicMeasurement>& measurements, double t_ref,
    const NoiseConfig& noise, const UtParams& params);

}  // namespace deskew
