#include "deskew/motion_correction.hpp"

#include <stdexcept>

namespace deskew {

namespace {

// Sandwich transforms for every sigma pose of one packet:
//   M_k = (T_veh_ld)^-1 * T_k * T_veh_ld.
// An exactly-identity sigma transform short-circuits to the identity so a
// zero delta pose reproduces points bit-exactly.
std::vector<HomTransform> sandwich_transforms(const SigmaPoints& sp,
                                              const HomTransform& t_veh_ld,
                                              const HomTransform& t_ld_veh) {
  std::vector<HomTransform> out(sp.count());
  for (int k = 0; k < sp.count(); ++k) {
    const HomTransform t_k =
        pose_to_transform(Pose6D::from_vector(sp.points.col(k)));
    if (t_k.isIdentity(0.0)) {
      out[k] = HomTransform::Identity();
    } else {
      out[k] = t_ld_veh * t_k * t_veh_ld;
    }
  }
  return out;
}

GaussianState recover_point(const PointSigmaCloud& cloud,
                            const Eigen::VectorXd& wm,
                            const Eigen::VectorXd& wc) {
  SigmaPoints sp;
  sp.points = cloud.topRows<3>();  // homogeneous row is constant 1
  sp.wm = wm;
  sp.wc = wc;
  return ut_recover(sp);
}

}  // namespace

CorrectionResult correct_scan(const LidarScan& scan,
                              const std::vector<EgoPoseEstimate>& ego,
                              const HomTransform& t_veh_ld,
                              const UtParams& params,
                              const CorrectionOptions& options) {
  validate_scan(scan);
  const int n = static_cast<int>(scan.packets.size());
  if (static_cast<int>(ego.size()) != n) {
    throw std::invalid_argument(
        "correct_scan: one ego estimate per packet required");
  }
  if (!is_rigid_transform(t_veh_ld)) {
    throw std::invalid_argument("correct_scan: t_veh_ld is not rigid");
  }
  const HomTransform t_ld_veh = invert_rigid(t_veh_ld);

  CorrectionResult result;
  result.omega.packets.resize(n);
  std::vector<std::vector<CorrectedPoint>> per_packet(n);

#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    const LidarPacket& packet = scan.packets[i];
    const SigmaPoints sp = ut_decompose(ego[i].pose, params);

    SigmaSetOmega::Packet& omega = result.omega.packets[i];
    omega.packet_index = i;
    omega.timestamp = packet.timestamp;
    omega.wm = sp.wm;
    omega.wc = sp.wc;
    omega.points.resize(packet.points.size());

    const std::vector<HomTransform> sandwich =
        sandwich_transforms(sp, t_veh_ld, t_ld_veh);

    std::vector<CorrectedPoint>& corrected = per_packet[i];
    corrected.resize(packet.points.size());
    for (std::size_t j = 0; j < packet.points.size(); ++j) {
      PointSigmaCloud& cloud = omega.points[j];
      for (int k = 0; k < sp.count(); ++k) {
        cloud.col(k) = sandwich[k] * packet.points[j];
      }
      CorrectedPoint& cp = corrected[j];
      cp.packet_index = i;
      cp.point_index = static_cast<int>(j);
      cp.timestamp = packet.timestamp;
      if (options.with_point_cov) {
        const GaussianState g = recover_point(cloud, sp.wm, sp.wc);
        cp.mean = g.mean;
        cp.cov = g.cov;
      } else {
        SigmaPoints mean_only;
        mean_only.points = cloud.topRows<3>();
        mean_only.wm = sp.wm;
        mean_only.wc = sp.wc;
        cp.mean = ut_recover_mean(mean_only);
        cp.cov.setZero();
      }
    }
  }

  std::size_t total = 0;
  for (const auto& v : per_packet) total += v.size();
  result.points.reserve(total);
  for (auto& v : per_packet) {
    result.points.insert(result.points.end(), v.begin(), v.end());
  }
  return result;
}

namespace reference {

std::vector<CorrectedPoint> correct_scan_naive(
    const LidarScan& scan, const std::vector<EgoPoseEstimate>& ego,
    const HomTransform& t_veh_ld, const UtParams& params) {
  validate_scan(scan);
  if (ego.size() != scan.packets.size()) {
    throw std::invalid_argument(
        "correct_scan_naive: one ego estimate per packet required");
  }
  const HomTransform t_ld_veh = invert_rigid(t_veh_ld);

  std::vector<CorrectedPoint> out;
  for (std::size_t i = 0; i < scan.packets.size(); ++i) {
    const LidarPacket& packet = scan.packets[i];
    for (std::size_t j = 0; j < packet.points.size(); ++j) {
      const SigmaPoints sp = ut_decompose(ego[i].pose, params);
      SigmaPoints moved;
      moved.points.resize(3, sp.count());
      moved.wm = sp.wm;
      moved.wc = sp.wc;
      for (int k = 0; k < sp.count(); ++k) {
        const HomTransform t_k =
            pose_to_transform(Pose6D::from_vector(sp.points.col(k)));
        // Three explicit hops instead of one precomposed sandwich.
        LidarPoint q = t_veh_ld * packet.points[j];
        q = t_k * q;
        q = t_ld_veh * q;
        moved.points.col(k) = q.head<3>();
      }
      const GaussianState g = ut_recover(moved);
      out.push_back(CorrectedPoint{g.mean, g.cov, static_cast<int>(i),
                                   static_cast<int>(j), packet.timestamp});
    }
  }
  return out;
}

}  // namespace reference

}  // namespace deskew
