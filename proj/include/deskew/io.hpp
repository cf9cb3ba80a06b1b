#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "deskew/camera.hpp"
#include "deskew/consistency.hpp"
#include "deskew/ego_motion.hpp"
#include "deskew/geometry.hpp"
#include "deskew/simulation.hpp"
#include "deskew/unscented.hpp"

namespace deskew {

/// Calibration and processing parameters consumed by the CLI.
struct CalibrationConfig {
  struct Camera {
    std::string id;
    CameraIntrinsics intrinsics;
    HomTransform t_cam_ld{HomTransform::Identity()};
  };

  UtParams ut;
  NoiseConfig noise;
  HomTransform t_veh_ld{HomTransform::Identity()};
  std::vector<Camera> cameras;

  const Camera& camera(const std::string& id) const;  ///< throws ConfigError
};

/// Load and validate a JSON calibration config. Omitted sections fall back
/// to documented defaults. Throws ConfigError with path and field name.
CalibrationConfig load_config(const std::string& path);

/// Canonical form: full covariance matrices and 4x4 transforms, so
/// load -> save -> load is the identity.
void save_config(const CalibrationConfig& cfg, const std::string& path);

/// Line format `packet timestamp x y z`, `#` comments. Rejects malformed
/// rows (with line number), non-monotonic packets and empty input.
LidarScan read_scan(const std::string& path);

/// Line format `timestamp vx vy vz wx wy wz`.
std::vector<KinematicMeasurement> read_measurements(const std::string& path);

/// Output record: corrected point, its 3D covariance and the optional
/// pixel branch.
struct AugmentedPoint {
  int packet_index{0};
  double timestamp{0.0};
  Eigen::Vector3d xyz{Eigen::Vector3d::Zero()};
  Eigen::Matrix3d cov3{Eigen::Matrix3d::Zero()};

  struct Pixel {
    std::string camera_id;
    Eigen::Vector2d uv{Eigen::Vector2d::Zero()};
    Eigen::Matrix2d cov2{Eigen::Matrix2d::Zero()};
    bool in_frame{false};
  };
  std::optional<Pixel> pixel;
};

/// Text (default) or compact binary (magic AUGPCL01). Both round-trip
/// float64 exactly and are byte-stable for identical input.
void write_augmented_cloud(const std::vector<AugmentedPoint>& points,
                           const std::string& path, bool binary = false);

std::vector<AugmentedPoint> read_augmented_cloud(const std::string& path);

/// JSON consistency report; byte-stable for identical reports.
std::string report_to_json(const ConsistencyReport& report);
void write_report(const ConsistencyReport& report, const std::string& path);

/// JSON form of a single pooled NEES summary.
std::string nees_summary_json(const NeesSummary& summary);

/// Simulation parameters from JSON; omitted fields keep their defaults.
SimConfig load_sim_config(const std::string& path);

/// Plot-data writers (one record per line, `#` header).
void write_points_xyz(const std::vector<Eigen::Vector3d>& points,
                      const std::string& path);
void write_pixels_uv(const std::vector<Eigen::Vector2d>& pixels,
                     const std::string& path);

/// Shortest round-trip decimal form of a double.
std::string canonical_double(double v);

}  // namespace deskew
