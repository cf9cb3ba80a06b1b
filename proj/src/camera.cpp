#include "deskew/camera.hpp"

#include <cmath>
#include <stdexcept>

#include "deskew/stats.hpp"
#include "deskew/unscented.hpp"

namespace deskew {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0 && fy > 0.0)) {
    throw std::invalid_argument("intrinsics: focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("intrinsics: image size must be positive");
  }
}

std::optional<Eigen::Vector2d> project_point(const Eigen::Vector3d& p_cam,
                                             const CameraIntrinsics& intr) {
  const double z = p_cam.z();
  if (z <= kMinCameraDepth) return std::nullopt;

  const double a = p_cam.x() / z;
  const double b = p_cam.y() / z;
  const double r = std::sqrt(a * a + b * b);

  double scale;
  if (r < 1e-8) {
    scale = 1.0;  // theta_d / r -> 1 on axis
  } else {
    const double theta = std::atan(r);
    const double t2 = theta * theta;
    const double theta_d =
        theta *
        (1.0 + t2 * (intr.k1 + t2 * (intr.k2 + t2 * (intr.k3 + t2 * intr.k4))));
    scale = theta_d / r;
  }

  const double xp = scale * a;
  const double yp = scale * b;
  const double u = intr.fx * (xp + intr.skew * yp) + intr.cx;
  const double v = intr.fy * yp + intr.cy;
  return Eigen::Vector2d(u, v);
}

ProjectionResult project_omega(const SigmaSetOmega& omega,
                               const HomTransform& t_cam_ld,
                               const CameraIntrinsics& intr) {
  intr.validate();
  if (!is_rigid_transform(t_cam_ld)) {
    throw std::invalid_argument("project_omega: t_cam_ld is not rigid");
  }

  const int n = static_cast<int>(omega.packets.size());
  std::vector<std::vector<ProjectedPoint>> per_packet(n);
  std::vector<int> dropped(n, 0);

#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    const SigmaSetOmega::Packet& packet = omega.packets[i];
    std::vector<ProjectedPoint>& out = per_packet[i];
    out.reserve(packet.points.size());

    const int count = static_cast<int>(packet.wm.size());
    SigmaPoints pixels;
    pixels.points.resize(2, count);
    pixels.wm = packet.wm;
    pixels.wc = packet.wc;

    for (std::size_t j = 0; j < packet.points.size(); ++j) {
      bool behind = false;
      for (int k = 0; k < count && !behind; ++k) {
        const LidarPoint q = t_cam_ld * packet.points[j].col(k);
        const auto px = project_point(q.head<3>(), intr);
        if (!px) {
          behind = true;
        } else {
          pixels.points.col(k) = *px;
        }
      }
      if (behind) {
        ++dropped[i];
        continue;
      }
      const GaussianState g = ut_recover(pixels);
      ProjectedPoint pp;
      pp.mean = g.mean;
      pp.cov = g.cov;
      pp.packet_index = packet.packet_index;
      pp.point_index = static_cast<int>(j);
      pp.in_frame = g.mean.x() >= 0.0 && g.mean.x() < intr.width &&
                    g.mean.y() >= 0.0 && g.mean.y() < intr.height;
      out.push_back(pp);
    }
  }

  ProjectionResult result;
  for (int i = 0; i < n; ++i) {
    result.dropped_behind_camera += dropped[i];
    result.points.insert(result.points.end(), per_packet[i].begin(),
                         per_packet[i].end());
  }
  return result;
}

Ellipse ellipse_95(const Eigen::Matrix2d& cov) {
  const double q = chi2_quantile(2, 0.95);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  const Eigen::Vector2d ev = es.eigenvalues().cwiseMax(0.0);  // ascending

  Ellipse e;
  e.a = std::sqrt(q * ev[1]);
  e.b = std::sqrt(q * ev[0]);
  const double span = std::max(ev[1], 1.0e-300);
  if ((ev[1] - ev[0]) <= 1e-12 * span) {
    e.theta = 0.0;  // circular: orientation is free
    return e;
  }
  const Eigen::Vector2d major = es.eigenvectors().col(1);
  double theta = std::atan2(major.y(), major.x());
  if (theta > M_PI / 2.0) theta -= M_PI;
  if (theta <= -M_PI / 2.0) theta += M_PI;
  e.theta = theta;
  return e;
}

Ellipsoid ellipsoid_95(const Eigen::Matrix3d& cov) {
  const double q = chi2_quantile(3, 0.95);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  const Eigen::Vector3d ev = es.eigenvalues().cwiseMax(0.0);

  Ellipsoid e;
  // Descending axes with matching principal directions.
  for (int i = 0; i < 3; ++i) {
    e.axes[i] = std::sqrt(q * ev[2 - i]);
    e.rotation.col(i) = es.eigenvectors().col(2 - i);
  }
  if (e.rotation.determinant() < 0.0) e.rotation.col(2) *= -1.0;
  return e;
}

}  // namespace deskew
