#pragma once

#include <Eigen/Dense>
#include <vector>

namespace deskew {

using HomTransform = Eigen::Matrix4d;
using LidarPoint = Eigen::Vector4d;  ///< homogeneous [x y z 1], meters
using Vector6d = Eigen::Matrix<double, 6, 1>;

/// 6-DOF pose: translation in meters, roll/pitch/yaw in radians.
/// Rotation convention: R = Rz(yaw) * Ry(pitch) * Rx(roll)
/// (x forward, y left, z up).
struct Pose6D {
  double x{0.0};
  double y{0.0};
  double z{0.0};
  double roll{0.0};
  double pitch{0.0};
  double yaw{0.0};

  Vector6d vector() const;
  static Pose6D from_vector(const Vector6d& v);

  /// Copy with all three angles wrapped to (-pi, pi].
  Pose6D wrapped() const;

  bool finite() const;
};

/// Group of lidar returns sharing one timestamp.
struct LidarPacket {
  std::vector<LidarPoint> points;
  double timestamp{0.0};  ///< seconds
};

struct LidarScan {
  std::vector<LidarPacket> packets;
};

/// Gaussian over a real vector: mean and covariance of matching dimension.
struct GaussianState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  int dim() const { return static_cast<int>(mean.size()); }
};

/// Wrap an angle to (-pi, pi].
double wrap_angle(double a);

/// Homogeneous transform with rotation Rz(yaw)*Ry(pitch)*Rx(roll) and
/// translation (x, y, z). Throws std::invalid_argument on non-finite input.
HomTransform pose_to_transform(const Pose6D& p);

/// Apply a homogeneous transform to a homogeneous point.
LidarPoint transform_point(const HomTransform& t, const LidarPoint& p);

/// Exact inverse of a rigid transform (R^T, -R^T t).
HomTransform invert_rigid(const HomTransform& t);

/// True when the bottom row is [0 0 0 1] and the rotation block is
/// orthonormal with determinant +1 within `tol`.
bool is_rigid_transform(const HomTransform& t, double tol = 1e-9);

/// Throws std::invalid_argument unless packets are non-empty and packet
/// timestamps strictly increase.
void validate_scan(const LidarScan& scan);

LidarPoint make_lidar_point(double x, double y, double z);

}  // namespace deskew
