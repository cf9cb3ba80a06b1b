#include "deskew/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace deskew {

Vector6d Pose6D::vector() const {
  Vector6d v;
  v << x, y, z, roll, pitch, yaw;
  return v;
}

Pose6D Pose6D::from_vector(const Vector6d& v) {
  return Pose6D{v[0], v[1], v[2], v[3], v[4], v[5]};
}

Pose6D Pose6D::wrapped() const {
  Pose6D p = *this;
  p.roll = wrap_angle(p.roll);
  p.pitch = wrap_angle(p.pitch);
  p.yaw = wrap_angle(p.yaw);
  return p;
}

bool Pose6D::finite() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(z) &&
         std::isfinite(roll) && std::isfinite(pitch) && std::isfinite(yaw);
}

double wrap_angle(double a) {
  double r = std::fmod(a + M_PI, 2.0 * M_PI);
  if (r <= 0.0) r += 2.0 * M_PI;
  return r - M_PI;
}

HomTransform pose_to_transform(const Pose6D& p) {
  if (!p.finite()) {
    throw std::invalid_argument("pose_to_transform: non-finite pose");
  }
  const double cr = std::cos(p.roll), sr = std::sin(p.roll);
  const double cp = std::cos(p.pitch), sp = std::sin(p.pitch);
  const double cy = std::cos(p.yaw), sy = std::sin(p.yaw);

  HomTransform t = HomTransform::Identity();
  // R = Rz(yaw) * Ry(pitch) * Rx(roll)
  t(0, 0) = cy * cp;
  t(0, 1) = cy * sp * sr - sy * cr;
  t(0, 2) = cy * sp * cr + sy * sr;
  t(1, 0) = sy * cp;
  t(1, 1) = sy * sp * sr + cy * cr;
  t(1, 2) = sy * sp * cr - cy * sr;
  t(2, 0) = -sp;
  t(2, 1) = cp * sr;
  t(2, 2) = cp * cr;
  t(0, 3) = p.x;
  t(1, 3) = p.y;
  t(2, 3) = p.z;
  return t;
}

LidarPoint transform_point(const HomTransform& t, const LidarPoint& p) {
  return t * p;
}

HomTransform invert_rigid(const HomTransform& t) {
  HomTransform inv = HomTransform::Identity();
  const Eigen::Matrix3d rt = t.block<3, 3>(0, 0).transpose();
  inv.block<3, 3>(0, 0) = rt;
  inv.block<3, 1>(0, 3) = -rt * t.block<3, 1>(0, 3);
  return inv;
}

bool is_rigid_transform(const HomTransform& t, double tol) {
  if (!t.allFinite()) return false;
  if (t(3, 0) != 0.0 || t(3, 1) != 0.0 || t(3, 2) != 0.0 || t(3, 3) != 1.0) {
    return false;
  }
  const Eigen::Matrix3d r = t.block<3, 3>(0, 0);
  const Eigen::Matrix3d err = r.transpose() * r - Eigen::Matrix3d::Identity();
  if (err.cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(r.determinant() - 1.0) <= tol;
}

void validate_scan(const LidarScan& scan) {
  if (scan.packets.empty()) {
    throw std::invalid_argument("scan has no packets");
  }
  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < scan.packets.size(); ++i) {
    const LidarPacket& pk = scan.packets[i];
    if (pk.points.empty()) {
      throw std::invalid_argument("packet " + std::to_string(i) +
                                  " has no points");
    }
    if (!(pk.timestamp > prev)) {
      throw std::invalid_argument(
          "packet timestamps not strictly increasing at index " +
          std::to_string(i));
    }
    prev = pk.timestamp;
  }
}

LidarPoint make_lidar_point(double x, double y, double z) {
  return LidarPoint(x, y, z, 1.0);
}

}  // namespace deskew
