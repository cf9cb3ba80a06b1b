#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "deskew/camera.hpp"
#include "deskew/consistency.hpp"
#include "deskew/ego_motion.hpp"
#include "deskew/geometry.hpp"
#include "deskew/motion_correction.hpp"
#include "deskew/rng.hpp"
#include "deskew/unscented.hpp"

namespace deskew {

/// Sensor mounting and camera model used by the simulation.
struct SensorRig {
  CameraIntrinsics intrinsics;
  HomTransform t_cam_ld{HomTransform::Identity()};
  HomTransform t_veh_ld{HomTransform::Identity()};
};

/// Front-facing fisheye camera and a roof-mounted lidar on a vehicle with
/// x forward, y left, z up.
SensorRig default_sensor_rig();

/// Monte Carlo scenario parameters.
struct SimConfig {
  double v_min{2.0};    ///< m/s
  double v_max{10.0};
  double w_min_deg{-60.0};  ///< deg/s
  double w_max_deg{60.0};
  double scan_period{0.1};  ///< s per revolution
  int packets_per_scan{76};
  double elevation_min_deg{-15.0};
  double elevation_max_deg{15.0};
  double range_min{1.0};  ///< m
  double range_max{100.0};
  double noise_v_std{0.1};      ///< m/s
  double noise_w_std_deg{5.0};  ///< deg/s
  double jitter_std{0.0003};    ///< s
  int runs{200};
  std::uint64_t seed{1};
  bool clockwise{true};
  /// Odometry stream rate. The default matches the packet rate so every
  /// propagation step consumes an independent reading, which is what the
  /// per-step noise model of the estimator assumes. Lower it (e.g. to the
  /// platform's 100 Hz) to exercise asynchronous nearest-timestamp
  /// association; NEES consistency then degrades because consecutive steps
  /// reuse the same noisy reading.
  int measurement_rate_hz{760};
  SensorRig rig = default_sensor_rig();
  UtParams ut{};

  void validate() const;

  /// Estimator noise matched to the generator.
  NoiseConfig estimator_noise() const;
};

/// One simulated revolution: ground truth plus what the sensors recorded.
struct Episode {
  double v_x{0.0};    ///< true body-frame forward speed, m/s
  double w_yaw{0.0};  ///< true yaw rate, rad/s

  LidarScan scan;  ///< recorded timestamps, points as measured
  std::vector<KinematicMeasurement> measurements;

  /// Per packet: the observed point re-expressed in the lidar frame at the
  /// true last-packet time and at the true image time.
  std::vector<Eigen::Vector3d> truth_3d;
  std::vector<Eigen::Vector3d> truth_3d_image;
  /// Per packet: true pixel of the point, absent when behind the camera.
  std::vector<std::optional<Eigen::Vector2d>> truth_pixels;

  double t_ref_3d{0.0};  ///< recorded last packet timestamp
  double t_ref_2d{0.0};  ///< recorded image timestamp (scan end)
};

/// True vehicle pose at time t in the world frame (pose at t=0 is the
/// origin, heading +x).
Pose6D sim_vehicle_pose(double v_x, double w_yaw, double t);

/// True delta pose of the vehicle at time t relative to its frame at
/// t_ref.
Pose6D sim_delta_pose(double v_x, double w_yaw, double t_ref, double t);

/// Generate one episode from the given stream. Draw order is fixed, so a
/// given (seed, episode) pair reproduces exactly.
Episode generate_episode(const SimConfig& cfg, SplitMix64& rng);

/// Full-pipeline scores of one episode.
struct EpisodeEvaluation {
  std::vector<double> nees_3d;  ///< one per packet
  std::vector<double> nees_2d;  ///< one per scored in-frame pixel
  int dropped_2d{0};
  std::vector<CorrectedPoint> corrected_3d;
  ProjectionResult projection_2d;
};

/// Run ego-motion estimation, correction and projection on an episode and
/// score NEES against the episode's ground truth.
EpisodeEvaluation evaluate_episode(const SimConfig& cfg, const Episode& ep);

struct MonteCarloOutput {
  ConsistencyReport report;
  Episode episode0;            ///< kept for figure data
  EpisodeEvaluation eval0;
};

/// Run cfg.runs independent episodes (in parallel; per-episode RNG streams
/// keep the result identical for any thread count) and pool the NEES
/// scores.
MonteCarloOutput run_monte_carlo(const SimConfig& cfg);

}  // namespace deskew
