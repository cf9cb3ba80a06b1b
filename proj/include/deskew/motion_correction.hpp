#pragma once

#include <Eigen/Dense>
#include <vector>

#include "deskew/ego_motion.hpp"
#include "deskew/geometry.hpp"
#include "deskew/unscented.hpp"

namespace deskew {

/// Sigma points of one corrected point: 4 homogeneous rows, 2*6+1 columns.
using PointSigmaCloud = Eigen::Matrix<double, 4, 13>;

/// Motion-corrected sigma points of a whole scan, retained so that camera
/// projection can reuse them without another decomposition. Weights are
/// shared by every point of a packet.
struct SigmaSetOmega {
  struct Packet {
    int packet_index{0};
    double timestamp{0.0};
    Eigen::VectorXd wm;  ///< 13 mean weights
    Eigen::VectorXd wc;  ///< 13 covariance weights
    std::vector<PointSigmaCloud> points;
  };
  std::vector<Packet> packets;
};

/// Corrected lidar point: Gaussian 3D position in the lidar frame at t_ref.
struct CorrectedPoint {
  Eigen::Vector3d mean{Eigen::Vector3d::Zero()};
  Eigen::Matrix3d cov{Eigen::Matrix3d::Zero()};
  int packet_index{0};
  int point_index{0};
  double timestamp{0.0};  ///< source packet timestamp
};

struct CorrectionOptions {
  /// Recover the 3x3 covariance of every corrected point. Omega alone
  /// suffices when only projection is needed.
  bool with_point_cov{true};
};

struct CorrectionResult {
  std::vector<CorrectedPoint> points;  ///< packet-major, point-minor
  SigmaSetOmega omega;
};

/// Apply the estimated delta poses to every point of the scan. Per packet,
/// the 6-DOF pose Gaussian is decomposed once into sigma points; each sigma
/// pose becomes a transform, each point is moved through
/// (T_veh_ld)^-1 * T_k * T_veh_ld, and per-point Gaussians are recovered
/// with the packet's shared weights. Packets are processed in parallel;
/// output ordering is deterministic.
CorrectionResult correct_scan(const LidarScan& scan,
                              const std::vector<EgoPoseEstimate>& ego,
                              const HomTransform& t_veh_ld,
                              const UtParams& params,
                              const CorrectionOptions& options = {});

namespace reference {

/// Serial reference: runs the full decompose/transform/recover cycle for
/// every single point instead of sharing sigma poses per packet. Kept for
/// testing the packet-level kernel and as the benchmark baseline.
std::vector<CorrectedPoint> correct_scan_naive(
    const LidarScan& scan, const std::vector<EgoPoseEstimate>& ego,
    const HomTransform& t_veh_ld, const UtParams& params);

}  // namespace reference

}  // namespace deskew
